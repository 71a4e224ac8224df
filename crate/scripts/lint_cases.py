"""Hand-written lint cases. Each entry is (name, source)."""

CASES = [
    ("undef_simple", "print(x)\n"),
    ("undef_call", "foo(1)\n"),
    ("undef_later_module_def", "def f():\n    return g()\n\ndef g():\n    return 1\n"),
    ("undef_in_class_body", "class A:\n    x = 1\n    def f(self):\n        return x\n"),
    ("class_attr_in_comprehension", "class A:\n    xs = [1]\n    ys = [x for x in xs]\n    zs = [xs for _ in range(3)]\n"),
    ("builtin_ok", "print(len([]), int, __file__, __name__, WindowsError)\n"),
    ("builtin_shadow_local", "def f():\n    print(len)\n    len = 3\n    return len\n"),
    ("undefined_local_enclosing", "x = 1\ndef f():\n    print(x)\n    x = 2\n    return x\n"),
    ("undefined_local_nested", "def outer():\n    cnt = 0\n    def inner():\n        cnt += 1\n        return cnt\n    return inner\n"),
    ("undefined_local_augassign_module", "cnt = 0\ndef f():\n    cnt += 1\n"),
    ("global_decl", "def f():\n    global g\n    g = 1\n\ndef h():\n    return g\n"),
    ("global_undefined_before", "def f():\n    print(zz)\n\ndef h():\n    global zz\n    zz = 1\n"),
    ("nonlocal_decl", "def f():\n    a = 1\n    def g():\n        nonlocal a\n        a = 2\n    g()\n    return a\n"),
    ("unused_var", "def f():\n    x = 1\n"),
    ("unused_var_tuple", "def f():\n    (a, b) = 1, 2\n    c, d = g()\n    [e, f2] = g()\n"),
    ("unused_var_literal_tuple", "def f():\n    a, b = 1, 2\n"),
    ("unused_var_augassign", "def f():\n    x = 0\n    x += 1\n"),
    ("unused_var_annassign", "def f():\n    x: int = 1\n    y: int\n"),
    ("unused_var_with", "def f():\n    with open('a') as fh:\n        pass\n    with open('b') as (p, q):\n        pass\n"),
    ("unused_var_for", "def f():\n    for i in range(3):\n        pass\n"),
    ("unused_var_except", "def f():\n    try:\n        pass\n    except ValueError as e:\n        pass\n"),
    ("unused_except_module", "try:\n    pass\nexcept ValueError as err:\n    pass\n"),
    ("except_used", "def f():\n    try:\n        pass\n    except ValueError as e:\n        print(e)\n"),
    ("unused_var_locals", "def f():\n    x = 1\n    return locals()\n"),
    ("unused_var_underscore", "def f():\n    _ = 1\n    __ = 2\n"),
    ("unused_walrus", "def f():\n    if (n := 10) > 5:\n        pass\n"),
    ("walrus_comprehension", "def f(xs):\n    ys = [y := x for x in xs]\n    return ys, y\n"),
    ("unused_global_scope_assign", "x = 1\ny = x\n"),
    ("fstring_no_placeholder", "x = f'hello'\n"),
    ("fstring_with_placeholder", "x = 1\ny = f'{x}'\n"),
    ("fstring_nested_format_spec", "w = 3\ny = f'{1:{w}}'\n"),
    ("fstring_concat", "x = 1\ny = ('a' f'b' 'c')\nz = ('a' f'{x}')\n"),
    ("fstring_in_function", "def f():\n    return f'nothing'\n"),
    ("unused_import", "import os\n"),
    ("unused_import_dotted", "import os.path\n"),
    ("unused_import_as", "import os.path as p\nimport sys as system\n"),
    ("unused_from_import", "from os import path, sep\nprint(sep)\n"),
    ("unused_from_import_as", "from os import path as p\n"),
    ("from_import_same_as", "from os import path as path\n"),
    ("relative_import", "from . import a\nfrom .. import b as c\nfrom .m import d\n"),
    ("import_used_attr", "import os.path\nprint(os.getcwd())\n"),
    ("import_in_function", "def f():\n    import json\n"),
    ("import_all_export", "import os\nimport sys\n__all__ = ['os']\n"),
    ("import_all_augment", "import os\nimport sys\n__all__ = ['os']\n__all__ += ['sys']\n"),
    ("import_all_extend", "import os\nimport sys\n__all__ = []\n__all__.extend(['os'])\n__all__.append('sys')\n"),
    ("all_undefined_name", "__all__ = ['missing']\n"),
    ("all_nonliteral", "import os\n__all__ = [x for x in ['os']]\n"),
    ("import_star", "from os import *\nprint(path)\n"),
    ("import_star_unused", "from os import *\n"),
    ("future_import", "from __future__ import annotations\n"),
    ("future_annotations", "from __future__ import annotations\ndef f(x: Undefined) -> Other:\n    pass\n"),
    ("redef_import", "import os\nimport os\n"),
    ("redef_function", "def f():\n    pass\n\ndef f():\n    pass\n"),
    ("redef_class", "class A:\n    pass\n\nclass A:\n    pass\n"),
    ("redef_used_between", "import os\nos.getcwd()\nimport os\n"),
    ("redef_in_if_else", "if x:\n    def f():\n        pass\nelse:\n    def f():\n        pass\n"),
    ("redef_in_try_except", "try:\n    import json\nexcept ImportError:\n    import simplejson as json\n"),
    ("redef_try_else", "try:\n    import a\nexcept ImportError:\n    pass\nelse:\n    import a\n"),
    ("redef_decorated", "def f():\n    pass\n\n@decorator\ndef f():\n    pass\n"),
    ("redef_overload", "from typing import overload\n@overload\ndef f(x: int) -> int: ...\n@overload\ndef f(x: str) -> str: ...\ndef f(x):\n    return x\n"),
    ("redef_import_by_function", "import os\ndef os():\n    pass\n"),
    ("redef_import_by_assign", "import os\nos = 1\n"),
    ("redef_method", "class A:\n    def m(self):\n        pass\n    def m(self):\n        pass\n"),
    ("redef_submodule", "import os\nimport os.path\n"),
    ("redef_submodule_2", "import os.path\nimport os\n"),
    ("redef_from_import_twice", "from a import b\nfrom a import b\n"),
    ("redef_in_for_loop", "import fu\nfor fu in range(2):\n    pass\n"),
    ("redef_comprehension_shadow", "import fu\n[1 for fu in range(1)]\n"),
    ("redef_conditional_function", "def f():\n    pass\nif True:\n    def f():\n        pass\n"),
    ("redef_nested_function", "def a():\n    def b():\n        pass\n    def b():\n        pass\n    return b\n"),
    ("redef_property_setter", "class A:\n    @property\n    def x(self):\n        return 1\n    @x.setter\n    def x(self, v):\n        pass\n"),
    ("lambda_args", "f = lambda a, b=1, *c, **d: a + b + undefined_l\n"),
    ("lambda_default_undefined", "f = lambda a=undef_default: a\n"),
    ("function_defaults", "def f(a=undef_a, *, b=undef_b):\n    return a, b\n"),
    ("function_annotations", "def f(a: UndefA, b: 'UndefB' = 1) -> 'UndefRet':\n    return a, b\n"),
    ("string_annotation_ok", "from typing import List\ndef f(a: 'List[int]'):\n    return a\n"),
    ("string_annotation_bad", "def f(a: 'not valid ('):\n    return a\n"),
    ("var_annotation_string", "x: 'Missing' = 1\n"),
    ("var_annotation_local", "def f():\n    x: 'Missing'\n    y: List[int] = []\n    return y\n"),
    ("typing_cast", "from typing import cast\nx = cast('Foo', 1)\n"),
    ("typing_typevar", "from typing import TypeVar\nT = TypeVar('T', bound='Bound')\n"),
    ("typing_literal", "from typing import Literal\nx: Literal['notaname'] = 'notaname'\n"),
    ("typing_annotated", "from typing import Annotated\nx: Annotated[int, 'meta'] = 1\n"),
    ("typing_namedtuple", "from typing import NamedTuple\nP = NamedTuple('P', [('x', 'Foo')])\n"),
    ("typing_typeddict", "from typing import TypedDict\nD = TypedDict('D', {'a': 'Bar'})\n"),
    ("typing_module_attr", "import typing\nx: typing.Literal['xyz'] = 'xyz'\n"),
    ("class_scope_magic", "class A:\n    print(__module__, __qualname__)\n"),
    ("class_scope_magic_outside", "print(__module__)\n"),
    ("class_bases_undefined", "class A(Base, metaclass=Meta):\n    pass\n"),
    ("class_decorator_undefined", "@deco\nclass A:\n    pass\n"),
    ("class_method_name_visibility", "class A:\n    def m(self):\n        return m\n"),
    ("del_name", "x = 1\ndel x\nprint(x)\n"),
    ("del_undefined", "del y\n"),
    ("del_in_function", "def f():\n    a = 1\n    del a\n    return a\n"),
    ("del_conditional", "def f():\n    a = 1\n    if a:\n        del a\n    return a\n"),
    ("del_in_loop", "def f(xs):\n    for x in xs:\n        a = x\n        del a\n"),
    ("except_name_cleared", "try:\n    pass\nexcept Exception as e:\n    pass\nprint(e)\n"),
    ("except_nameerror_guard", "try:\n    unicode\nexcept NameError:\n    unicode = str\n"),
    ("except_tuple_nameerror", "try:\n    foo\nexcept (NameError, ValueError):\n    pass\n"),
    ("try_finally", "def f():\n    try:\n        v = 1\n    finally:\n        pass\n"),
    ("comprehension_scope", "xs = [i for i in range(3)]\nprint(i)\n"),
    ("comprehension_nested", "m = [[a * b for a in range(2)] for b in range(3)]\n"),
    ("dictcomp_setcomp_gen", "d = {k: v for k, v in {}.items()}\ns = {q for q in ()}\ng = (r for r in [])\n"),
    ("comprehension_undefined", "r = [z for _ in range(3)]\n"),
    ("generator_first_iter", "def f():\n    return (x for x in x)\n"),
    ("star_assign", "def f():\n    a, *b = [1, 2, 3]\n"),
    ("starred_used", "def f():\n    a, *b = g()\n    return b\n"),
    ("attribute_assign", "def f(o):\n    o.x = 1\n    o[0] = 2\n"),
    ("conditional_expr", "def f(a):\n    v = 1 if a else 2\n"),
    ("while_else", "def f():\n    while cond():\n        x = 1\n    else:\n        y = 2\n"),
    ("async_function", "async def f():\n    async with a() as b:\n        pass\n    async for c in d():\n        pass\n    await e\n"),
    ("async_comprehension", "async def f():\n    return [x async for x in aiter_()]\n"),
    ("yield_module", "yield undefined_y\n"),
    ("return_in_class", "class A:\n    return xyz\n"),
    ("decorators_args", "@deco(arg=undefined_arg)\ndef f():\n    pass\n"),
    ("keyword_args", "f(a=1, **kw)\n"),
    ("dict_unpack", "d = {**other, 'a': 1}\n"),
    ("set_display", "s = {a, b}\n"),
    ("slice_usage", "x = [1, 2]\nprint(x[lo:hi:st])\n"),
    ("ext_slice", "x = y[1:2, 3]\n"),
    ("assert_stmt", "assert cond, msg\n"),
    ("raise_from", "raise Error() from cause\n"),
    ("global_in_class", "class A:\n    global B\n    B = 1\nprint(B)\n"),
    ("global_module_level", "global x\nx = 1\n"),
    ("global_unused_import_fn", "def f():\n    global os\n    import os\n"),
    ("nested_function_closure", "def f():\n    x = 1\n    def g():\n        return x\n    return g\n"),
    ("nested_function_unused", "def f():\n    def g():\n        pass\n"),
    ("nested_class_unused", "def f():\n    class C:\n        pass\n"),
    ("function_arg_unused", "def f(a, b, *args, **kwargs):\n    pass\n"),
    ("posonly_args", "def f(a, /, b, *, c):\n    return a, b, c\n"),
    ("shadow_arg", "def f(a):\n    a = 1\n"),
    ("augassign_undefined_local", "def f():\n    x += 1\n"),
    ("augassign_global_undefined", "y += 1\n"),
    ("name_in_conditional_import", "if cond:\n    import os\nelse:\n    os = None\n"),
    ("redefine_unused_import_in_func", "import os\ndef f():\n    import os\n"),
    ("import_used_in_func", "import os\ndef f():\n    return os.sep\n"),
    ("import_used_later_in_module", "def f():\n    return os.sep\nimport os\n"),
    ("use_before_def_module", "print(late)\nlate = 1\n"),
    ("use_before_def_function", "def f():\n    print(late)\n    late = 1\n"),
    ("builtins_redefined_function", "def f():\n    print(open)\n    open = 1\n    return open\n"),
    ("doctest_like_string", "def f():\n    '''\n    >>> undefined_in_doc\n    '''\n"),
    ("fstring_placeholder_call", "name = 'a'\nprint(f'{name!r}')\n"),
    ("fstring_conversion_only", "print(f'{{literal}}')\n"),
    ("nested_fstring", "a = 1\nprint(f'{f\"{a}\"}')\n"),
    ("bytes_strings", "x = b'abc'\ny = rb'x'\n"),
    ("tuple_unpack_for", "def f(pairs):\n    for k, v in pairs:\n        pass\n"),
    ("for_else", "def f(xs):\n    for x in xs:\n        break\n    else:\n        y = 1\n"),
    ("with_multiple", "def f():\n    with a() as x, b() as y:\n        return x\n"),
    ("if_redefinition_test", "try:\n    from a import b\nexcept ImportError:\n    b = None\n"),
    ("import_in_try_unused", "try:\n    import json\nexcept ImportError:\n    pass\n"),
    ("all_with_star_import", "from os import *\n__all__ = ['path', 'nothing_here']\n"),
    ("all_tuple", "import os\n__all__ = ('os',)\n"),
    ("all_concat", "import os\nimport sys\n__all__ = ['os'] + ['sys']\n"),
    ("all_in_function", "def f():\n    import os\n    __all__ = ['os']\n"),
    ("multiple_unused_imports", "import a, b, c\nfrom d import e, f as g\n"),
    ("conditional_function_def", "def f():\n    if x:\n        def g():\n            pass\n    else:\n        g = None\n    return g\n"),
    ("redef_while_unused_try_body", "try:\n    import a\n    import a\nexcept Exception:\n    pass\n"),
    ("class_redefines_import", "import A\nclass A:\n    pass\n"),
    ("lambda_in_class", "class A:\n    x = 1\n    f = lambda self: x\n"),
    ("method_uses_class_attr", "class A:\n    y = 1\n    def m(self):\n        return self.y + y\n"),
    ("recursive_function", "def fact(n):\n    return 1 if n < 2 else n * fact(n - 1)\n"),
    ("undefined_in_default_of_method", "class A:\n    k = 1\n    def m(self, a=k):\n        return a\n"),
    ("type_comments_ignored", "def f(a):\n    # type: (int) -> int\n    return a\n"),
    ("print_tuple", "print((a, b))\n"),
    ("starred_call", "f(*args, **kwargs)\n"),
    ("chained_comparison", "if a < b < c:\n    pass\n"),
    ("ellipsis_and_consts", "x = ...\ny = None\nz = True\n"),
    ("unicode_names", "café = 1\nprint(café, naïve)\n"),
    ("global_then_local_use", "def f():\n    global counter\n    counter += 1\n"),
    ("nonlocal_unused", "def f():\n    v = 0\n    def g():\n        nonlocal v\n        v = 1\n    return g\n"),
    ("try_except_else_finally", "def f():\n    try:\n        a = 1\n    except E as e:\n        b = 2\n    else:\n        c = 3\n    finally:\n        d = 4\n"),
    ("binding_in_if_used_after", "def f(c):\n    if c:\n        v = 1\n    return v\n"),
    ("listcomp_walrus_leak", "def f(xs):\n    if any((hit := x) for x in xs):\n        return hit\n"),
    ("dunder_all_class", "class A:\n    __all__ = ['x']\n"),
    ("import_alias_used", "import numpy as np\nnp.zeros(1)\n"),
    ("submodule_used", "import os.path\nos.path.join('a')\n"),
    ("from_future_unknown", "from __future__ import print_function\n"),
    ("deep_nesting", "def a():\n    def b():\n        def c():\n            return q\n        return c\n    return b\n"),
    ("ann_assign_class_scope", "class A:\n    x: int\n    y: 'Unknown' = 1\n"),
    ("augassign_attribute", "def f(o):\n    o.count += 1\n"),
    ("augassign_subscript_undefined", "d[0] += 1\n"),
    ("unused_var_with_print", "def f():\n    x = 1\n    print('x')\n"),
    ("tuple_in_for_comprehension", "r = [(a, b) for a, b in pairs]\n"),
    ("if_expression_walrus", "print(y := 1, y)\n"),
    ("string_concat_fstring_only", "print(f'a' 'b')\n"),
    ("format_spec_only", "x = 1\nprint(f'{x:>10}')\n"),
]
