"""Regenerates crates/core/tests/fixtures/golden.json.

Each listing is split after the docstring line of its last documented
function. Listings whose completion breaks the parse carry their expected
syntax error by hand; the rest are run through pyflakes 3.0.1 twice
(context alone, then context plus completion) and the new diagnostics,
keyed on (kind, symbol, line), are frozen.
Usage: python3 scripts/freeze_golden.py [pyflakes-site-dir]
"""
import ast
import json
import os
import sys

HERE = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, HERE)
if len(sys.argv) > 1:
    sys.path.insert(0, sys.argv[1])

from freeze_lint_fixtures import messages  # noqa: E402

LISTINGS = os.path.join(HERE, "..", "crates", "core", "tests", "fixtures", "listings")

# file -> (context line count, category, line)
SYNTAX = {
    "00.py": (18, "unexpected_eof", 31),
    "01.py": (22, "invalid_syntax", 23),
    "02.py": (3, "print_missing_parentheses", 6),
    "03.py": (13, "keyword_argument_repeated", 15),
}

# file -> (kind, symbol, line, name kind or None)
HEADLINES = {
    "04.py": ("UndefinedName", "factorial", 18, "function"),
    "05.py": ("UnusedVariable", "encoding_check", 15, None),
    "06.py": ("FStringMissingPlaceholders", "", 15, None),
    "07.py": ("UnusedImport", "urllib.parse", 17, None),
    "08.py": ("RedefinedWhileUnused", "dsl", 6, None),
    "09.py": ("UndefinedLocal", "cnt", 18, None),
}


def context_lines(src):
    tree = ast.parse(src, feature_version=(3, 8))
    docs = [
        n for n in ast.walk(tree)
        if isinstance(n, (ast.FunctionDef, ast.AsyncFunctionDef))
        and n.body and isinstance(n.body[0], ast.Expr)
        and isinstance(n.body[0].value, ast.Constant)
        and isinstance(n.body[0].value.value, str)
    ]
    last = max(docs, key=lambda n: n.body[0].lineno)
    return last.body[0].end_lineno


def two_pass(context, full):
    left = {}
    for d in messages(context):
        key = (d["kind"], d["symbol"], d["line"])
        left[key] = left.get(key, 0) + 1
    out = []
    for d in messages(full):
        key = (d["kind"], d["symbol"], d["line"])
        if left.get(key):
            left[key] -= 1
            continue
        out.append(d)
    return out


def main():
    cases = []
    for name in sorted(os.listdir(LISTINGS)):
        with open(os.path.join(LISTINGS, name), encoding="utf-8") as fh:
            src = fh.read()
        if name in SYNTAX:
            n, category, line = SYNTAX[name]
            cases.append({"file": name, "context_lines": n,
                          "ast_error": {"category": category, "line": line}})
            continue
        n = context_lines(src)
        lines = src.splitlines(keepends=True)
        context = "".join(lines[:n])
        kind, symbol, line, name_kind = HEADLINES[name]
        attributed = two_pass(context, src)
        assert any(d["kind"] == kind and d["symbol"] == symbol and d["line"] == line
                   for d in attributed), (name, attributed)
        cases.append({
            "file": name,
            "context_lines": n,
            "headline": {"kind": kind, "symbol": symbol, "line": line, "name_kind": name_kind},
            "attributed": attributed,
        })
    out = os.path.join(LISTINGS, "..", "golden.json")
    with open(out, "w") as fh:
        json.dump({"cases": cases}, fh, indent=1)
        fh.write("\n")
    print("wrote %d listings" % len(cases))


if __name__ == "__main__":
    main()
