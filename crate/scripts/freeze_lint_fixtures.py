"""Regenerates crates/core/tests/fixtures/lint_differential.json.

Runs pyflakes 3.0.1 over the hand-written cases in lint_cases.py plus a
batch of seeded random programs and stores the six tracked message kinds.
Usage: python3 scripts/freeze_lint_fixtures.py [pyflakes-site-dir]
"""
import ast
import json
import os
import random
import sys

HERE = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, HERE)
if len(sys.argv) > 1:
    sys.path.insert(0, sys.argv[1])

import pyflakes  # noqa: E402
from pyflakes import checker, messages as M  # noqa: E402
from lint_cases import CASES  # noqa: E402

assert pyflakes.__version__ == "3.0.1", pyflakes.__version__

KINDS = {
    M.UndefinedName: "UndefinedName",
    M.UnusedVariable: "UnusedVariable",
    M.FStringMissingPlaceholders: "FStringMissingPlaceholders",
    M.UnusedImport: "UnusedImport",
    M.RedefinedWhileUnused: "RedefinedWhileUnused",
    M.UndefinedLocal: "UndefinedLocal",
}
ORDER = list(KINDS.values())
# Names that are builtins on newer interpreters but not on 3.8.
AVOID = {"aiter", "anext", "EncodingWarning"}

NAMES = ["a", "b", "c", "d", "os", "sys", "f", "g", "n", "cnt"]
MODULES = ["os", "sys", "json", "os.path", "re"]


class Gen:
    def __init__(self, rng):
        self.rng = rng
        self.lines = []

    def name(self):
        return self.rng.choice(NAMES)

    def expr(self, depth=0):
        r = self.rng.random()
        if depth > 2 or r < 0.35:
            return self.name()
        if r < 0.45:
            return str(self.rng.randint(0, 9))
        if r < 0.55:
            return "%s(%s)" % (self.name(), self.expr(depth + 1))
        if r < 0.65:
            return "%s + %s" % (self.expr(depth + 1), self.expr(depth + 1))
        if r < 0.72:
            v = self.name()
            return "[%s for %s in %s]" % (self.expr(depth + 1), v, self.expr(depth + 1))
        if r < 0.78:
            return "f'%s'" % self.rng.choice(["x", "{%s}" % self.name(), "{{}}"])
        if r < 0.84:
            return "%s.attr" % self.name()
        if r < 0.9:
            return "lambda %s: %s" % (self.name(), self.expr(depth + 1))
        return "(%s := %s)" % (self.name(), self.expr(depth + 1))

    def emit(self, ind, text):
        self.lines.append("    " * ind + text)

    def block(self, ind, depth, n):
        for _ in range(n):
            self.stmt(ind, depth)

    def stmt(self, ind, depth):
        r = self.rng.random()
        if r < 0.2:
            self.emit(ind, "%s = %s" % (self.name(), self.expr()))
        elif r < 0.28:
            self.emit(ind, "%s += %s" % (self.name(), self.expr()))
        elif r < 0.36:
            m = self.rng.choice(MODULES)
            if self.rng.random() < 0.5:
                self.emit(ind, "import %s" % m)
            else:
                self.emit(ind, "from %s import %s" % (m, self.name()))
        elif r < 0.44:
            self.emit(ind, "print(%s)" % self.expr())
        elif r < 0.5:
            self.emit(ind, "del %s" % self.name())
        elif r < 0.55 and ind > 0:
            self.emit(ind, "%s %s" % (self.rng.choice(["global", "nonlocal"]), self.name()))
        elif r < 0.6:
            self.emit(ind, "return %s" % self.expr() if ind > 0 else "x = %s" % self.expr())
        elif depth < 3 and r < 0.72:
            args = ", ".join(sorted(set(self.rng.sample(NAMES, self.rng.randint(0, 2)))))
            self.emit(ind, "def %s(%s):" % (self.name(), args))
            self.block(ind + 1, depth + 1, self.rng.randint(1, 4))
        elif depth < 3 and r < 0.78:
            self.emit(ind, "class %s:" % self.name().upper())
            self.block(ind + 1, depth + 1, self.rng.randint(1, 3))
        elif depth < 3 and r < 0.84:
            self.emit(ind, "if %s:" % self.expr())
            self.block(ind + 1, depth + 1, self.rng.randint(1, 2))
            if self.rng.random() < 0.5:
                self.emit(ind, "else:")
                self.block(ind + 1, depth + 1, self.rng.randint(1, 2))
        elif depth < 3 and r < 0.9:
            self.emit(ind, "for %s in %s:" % (self.name(), self.expr()))
            self.block(ind + 1, depth + 1, self.rng.randint(1, 2))
        elif depth < 3 and r < 0.95:
            self.emit(ind, "try:")
            self.block(ind + 1, depth + 1, self.rng.randint(1, 2))
            self.emit(ind, "except %s as %s:" % (self.rng.choice(["Exception", "NameError", "E"]), self.name()))
            self.block(ind + 1, depth + 1, 1)
        else:
            self.emit(ind, "with %s as %s:" % (self.expr(), self.name()))
            self.block(ind + 1, depth + 1, 1)


def random_program(seed):
    g = Gen(random.Random(seed))
    g.block(0, 0, g.rng.randint(3, 8))
    return "\n".join(g.lines) + "\n"


def messages(src):
    tree = ast.parse(src, feature_version=(3, 8))
    w = checker.Checker(tree, filename="snippet.py")
    rows = []
    for m in w.messages:
        kind = KINDS.get(type(m))
        if kind is None:
            continue
        args = m.message_args
        if isinstance(args, str):
            # UndefinedLocal for a builtin carries the bare name.
            args = (args,)
        symbol = "" if kind == "FStringMissingPlaceholders" else args[0]
        related = None
        if kind == "RedefinedWhileUnused":
            related = args[1]
        elif kind == "UndefinedLocal" and "builtin" not in m.message:
            related = args[1]
        rows.append({
            "kind": kind,
            "symbol": symbol,
            "line": m.lineno,
            "col": m.col,
            "message": m.message % args,
            "related_line": related,
        })
    rows.sort(key=lambda d: (d["line"], d["col"], ORDER.index(d["kind"])))
    return rows


def parses(src):
    try:
        ast.parse(src, feature_version=(3, 8))
        return True
    except SyntaxError:
        return False


def main():
    cases = []
    for name, src in CASES:
        assert parses(src), name
        cases.append({"name": name, "source": src, "expected": messages(src)})
    seed = 0
    produced = 0
    while produced < 150:
        src = random_program(seed)
        seed += 1
        if not parses(src) or any(n in src for n in AVOID):
            continue
        cases.append({"name": "random_%03d" % seed, "source": src, "expected": messages(src)})
        produced += 1
    out = os.path.join(HERE, "..", "crates", "core", "tests", "fixtures", "lint_differential.json")
    with open(out, "w") as fh:
        json.dump({"linter": "pyflakes " + pyflakes.__version__, "cases": cases}, fh, indent=1, ensure_ascii=False)
        fh.write("\n")
    print("wrote %d cases" % len(cases))


if __name__ == "__main__":
    main()
