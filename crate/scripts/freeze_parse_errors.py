"""Regenerates crates/core/tests/fixtures/parse_errors.json.

Builds two corpora from standard-library modules: truncated windows
(random line ranges cut at a random character) and single-character
mutants of the windows that parse. Each is parsed with typed_ast's 3.7
grammar and the syntax error is adjusted to what CPython 3.8 reports:
"can't" became "cannot", the keyword-expression message was reworded,
columns are 0-based, "invalid syntax" points at the start of the offending
token, errors raised while building the tree moved one column right, and a
stray closing bracket gets the tokenizer's bracket message. Cases where
3.7 and 3.8 genuinely disagree are excluded by hand.
Usage: python3 scripts/freeze_parse_errors.py STDLIB_DIR
"""
import glob
import io
import json
import os
import random
import sys
import tokenize
from collections import defaultdict

from typed_ast import ast3

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..",
                   "crates", "core", "tests", "fixtures", "parse_errors.json")

# Case name -> why 3.7 output is not what 3.8 reports.
EXCLUDE = {
    "window_00627": "3.8 reports the unclosed bracket at EOF differently",
    "window_01091": "3.8 reports the unclosed bracket at EOF differently",
    "mutant_00420": "typed_ast allows a type comment before every indented block",
    "mutant_00564": "typed_ast allows a type comment before every indented block",
    "mutant_00729": "3.8 accepts a bare starred return value in the grammar",
    "mutant_00853": "3.7 reports the column past a multi-line string",
}
# Messages raised while building the tree rather than by the parser.
TREE_ERRORS = (
    "cannot assign to", "cannot delete", "illegal target for annotation",
    "keyword argument repeated", "positional argument follows",
    "iterable argument unpacking follows", "expression cannot contain assignment",
    "only single target", "named arguments must follow bare *",
    "non-default argument follows default argument",
    "Generator expression must be parenthesized",
)
MUTATION_CHARS = "()[]{}:'\"=,\t\\ @;.*"
PER_MESSAGE = 60


def windows(stdlib):
    rng = random.Random(7)
    ok = []
    for f in sorted(glob.glob(os.path.join(stdlib, "*.py"))):
        try:
            src = open(f, encoding="utf-8").read()
            ast3.parse(src, feature_version=7)
            ok.append(src)
        except Exception:
            pass
    for src in ok:
        lines = src.split("\n")
        for _ in range(12):
            a = rng.randrange(len(lines))
            b = min(len(lines), a + rng.randint(1, 30))
            chunk = "\n".join(lines[a:b])
            s = chunk[:rng.randrange(len(chunk) + 1)]
            if rng.random() < 0.5:
                s += "\n"
            yield s


def mutants(valid):
    rng = random.Random(5)
    for src in valid:
        if not src.strip():
            continue
        for _ in range(25):
            p = rng.randrange(len(src) + 1)
            if rng.random() < 0.5 and p < len(src):
                yield src[:p] + src[p + 1:]
            else:
                yield src[:p] + rng.choice(MUTATION_CHARS) + src[p:]


def bracket_message(src, line, col):
    """3.8 tokenizer message for a closing bracket at (line, col), if any."""
    pairs = {")": "(", "]": "[", "}": "{"}
    stack = []
    try:
        for t in tokenize.generate_tokens(io.StringIO(src).readline):
            if t.type != tokenize.OP:
                continue
            if t.start == (line, col):
                if t.string not in pairs:
                    return None
                if not stack:
                    return "unmatched '%s'" % t.string
                opener, oline = stack[-1]
                if pairs[t.string] == opener:
                    return None
                msg = "closing parenthesis '%s' does not match opening parenthesis '%s'" % (t.string, opener)
                if oline != line:
                    msg += " on line %d" % oline
                return msg
            if t.string in "([{":
                stack.append((t.string, t.start[0]))
            elif t.string in ")]}" and stack:
                stack.pop()
    except (tokenize.TokenError, IndentationError, SyntaxError):
        pass
    return None


def token_start(src, line, end):
    starts = {}
    try:
        for t in tokenize.generate_tokens(io.StringIO(src).readline):
            if t.start[0] == line == t.end[0]:
                starts[t.end[1]] = t.start[1]
    except Exception:
        pass
    return starts.get(end)


def expected(src):
    try:
        ast3.parse(src, feature_version=7)
        return None
    except SyntaxError as e:
        msg = e.msg.replace("can't", "cannot")
        if msg == "keyword cannot be an expression":
            msg = 'expression cannot contain assignment, perhaps you meant "=="?'
        if msg == "invalid token" or e.offset is None:
            return None
        col = e.offset - 1
        if msg.startswith(TREE_ERRORS):
            col = e.offset
        if msg == "invalid syntax":
            start = token_start(src, e.lineno, e.offset)
            if start is not None:
                col = start
            msg = bracket_message(src, e.lineno, col) or msg
        return msg, e.lineno, col


def main():
    by_msg = defaultdict(list)
    valid = []

    def add(name, src):
        exp = expected(src)
        if exp and name not in EXCLUDE:
            by_msg[exp[0]].append((name, src, exp))
        return exp

    for i, src in enumerate(windows(sys.argv[1])):
        if add("window_%05d" % i, src) is None:
            try:
                ast3.parse(src, feature_version=7)
                valid.append(src)
            except SyntaxError:
                pass
    n = 0
    for src in mutants(valid):
        if expected(src):
            add("mutant_%05d" % n, src)
            n += 1
    rng = random.Random(11)
    cases = []
    for msg in sorted(by_msg):
        group = by_msg[msg]
        picked = group if len(group) <= PER_MESSAGE else rng.sample(group, PER_MESSAGE)
        for name, src, (m, line, col) in sorted(picked, key=lambda t: t[0]):
            cases.append({"name": name, "source": src,
                          "message": m, "line": line, "col": col})
    with open(OUT, "w") as fh:
        json.dump({"cases": cases}, fh, indent=1, ensure_ascii=False)
        fh.write("\n")
    print("wrote %d cases over %d messages" % (len(cases), len(by_msg)))


if __name__ == "__main__":
    main()
