#!/usr/bin/env python3
"""A miniature SMT-LIB2 solver used to exercise the external-backend path.

Reads one script from stdin. Supports (set-logic ...), (declare-const X Int),
(assert EXPR), (check-sat), (get-model) with EXPR over = not and or => + - *
div and integer literals. Solves by brute force over |v| <= 300 when at most
two constants are declared, otherwise answers unknown.

Flags:
  --garbage       emit nonsense instead of an answer
  --reject-qfnia  reject QF_NIA scripts with an error, accept ALL
"""
import sys


def tokenize(text):
    out, cur = [], ""
    for ch in text:
        if ch in "()":
            if cur:
                out.append(cur)
                cur = ""
            out.append(ch)
        elif ch.isspace():
            if cur:
                out.append(cur)
                cur = ""
        else:
            cur += ch
    if cur:
        out.append(cur)
    return out


def parse(tokens):
    def rec(i):
        if tokens[i] == "(":
            items = []
            i += 1
            while tokens[i] != ")":
                node, i = rec(i)
                items.append(node)
            return items, i + 1
        return tokens[i], i + 1

    forms, i = [], 0
    while i < len(tokens):
        node, i = rec(i)
        forms.append(node)
    return forms


def ediv(a, b):
    return a // b if b > 0 else -(a // -b)


def ev(node, env):
    if isinstance(node, str):
        if node in env:
            return env[node]
        if node == "true":
            return True
        if node == "false":
            return False
        return int(node)
    head = node[0]
    args = node[1:]
    if head == "=":
        return ev(args[0], env) == ev(args[1], env)
    if head == "not":
        return not ev(args[0], env)
    if head == "and":
        return all(ev(a, env) for a in args)
    if head == "or":
        return any(ev(a, env) for a in args)
    if head == "=>":
        return (not ev(args[0], env)) or ev(args[1], env)
    if head == "+":
        return ev(args[0], env) + ev(args[1], env)
    if head == "-":
        if len(args) == 1:
            return -ev(args[0], env)
        return ev(args[0], env) - ev(args[1], env)
    if head == "*":
        return ev(args[0], env) * ev(args[1], env)
    if head == "div":
        d = ev(args[1], env)
        if d == 0:
            raise ZeroDivisionError
        return ediv(ev(args[0], env), d)
    raise ValueError("unsupported operator " + str(head))


def main():
    garbage = "--garbage" in sys.argv
    reject = "--reject-qfnia" in sys.argv
    text = sys.stdin.read()
    if garbage:
        print("flagrant system error")
        return
    forms = parse(tokenize(text))
    consts, asserts = [], []
    for f in forms:
        if not isinstance(f, list) or not f:
            continue
        if f[0] == "set-logic" and reject and f[1] == "QF_NIA":
            print('(error "logic QF_NIA unsupported")')
            return
        if f[0] == "declare-const":
            consts.append(f[1])
        if f[0] == "assert":
            asserts.append(f[1])

    if len(consts) > 2:
        print("unknown")
        return

    def holds(env):
        try:
            return all(ev(a, env) for a in asserts)
        except ZeroDivisionError:
            return False

    values = [0]
    for k in range(1, 301):
        values += [k, -k]
    if not consts:
        print("sat" if holds({}) else "unsat")
        print("(model )")
        return
    if len(consts) == 1:
        for v in values:
            if holds({consts[0]: v}):
                print("sat")
                print("(model (define-fun %s () Int %s))" % (consts[0], v if v >= 0 else "(- %d)" % -v))
                return
        print("unsat")
        return
    for v1 in values:
        for v2 in values:
            if holds({consts[0]: v1, consts[1]: v2}):
                print("sat")
                print("(model")
                for name, v in ((consts[0], v1), (consts[1], v2)):
                    print("  (define-fun %s () Int %s)" % (name, v if v >= 0 else "(- %d)" % -v))
                print(")")
                return
    print("unsat")


if __name__ == "__main__":
    main()
