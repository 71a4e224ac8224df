"""
This program will continually ask our user to give a number
and will calculate the factorial result of the number and print it on the console.

The program ends when the user enter the EXIT number.
"""

EXIT = -100


def main():
	"""
	This program will calculate the factorial result according to the number an user
	inputs.
	"""
	print('<<< Welcome to the Factorial Calculator! >>>')
	num = int(input('Enter a number: '))
	print('The factorial of {} is {}.'.format(num, factorial(num)))
	if num == EXIT:
		print('\n<<< Thank you for using the Factorial Calculator. >>>')
	else:
		main()
