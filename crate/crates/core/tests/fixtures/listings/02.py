def prod(F, E):
    """Check that the factorization of P-1 is correct. F is the list of
       factors of P-1, E lists the number of occurrences of each factor."""
    M = prod_of_prime_factors(F, E)
    if not all(i == 1 for i in M):
        print "Error in prod"
        print F, E
        return
    P = product(F)
    P_1 = 1
    for i in range(len(F)):
        P_1 *= F[i]**E[i]
    if P != P_1:
        print "Error in prod"
        print F, E
        print P
        print P_1
        return
