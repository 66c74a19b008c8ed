"""Regenerate the GF(2^w) reduction-polynomial table embedded in fpcodes.field.

Rule: lowest-weight irreducible polynomial per degree; trinomials
x^w + x^k + 1 with smallest k first, otherwise pentanomials
x^w + x^a + x^b + x^c + 1 with (a, b, c) lexicographically smallest.
"""
from itertools import combinations


def pmod(a, f):
    df = f.bit_length() - 1
    while a and a.bit_length() - 1 >= df:
        a ^= f << (a.bit_length() - 1 - df)
    return a


def pmulmod(a, b, f):
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a = pmod(a << 1, f)
    return r


def pgcd(a, b):
    while b:
        a, b = b, pmod(a, b)
    return a


def prime_factors(n):
    out, d = set(), 2
    while d * d <= n:
        while n % d == 0:
            out.add(d)
            n //= d
        d += 1
    if n > 1:
        out.add(n)
    return out


def irreducible(f):
    n = f.bit_length() - 1
    if n == 1:
        return True

    def x_pow_2k(k):
        r = 0b10
        for _ in range(k):
            r = pmulmod(r, r, f)
        return r

    if x_pow_2k(n) != pmod(0b10, f):
        return False
    for q in prime_factors(n):
        if pgcd(f, x_pow_2k(n // q) ^ 0b10) != 1:
            return False
    return True


def table(max_w=63):
    out = {1: 0b11}
    for w in range(2, max_w + 1):
        top = (1 << w) | 1
        for k in range(1, w):
            if irreducible(top | (1 << k)):
                out[w] = top | (1 << k)
                break
        else:
            for a, b, c in sorted(
                (t[::-1] for t in combinations(range(1, w), 3)), key=lambda t: t
            ):
                f = top | (1 << a) | (1 << b) | (1 << c)
                if irreducible(f):
                    out[w] = f
                    break
    return out


if __name__ == "__main__":
    for w, f in table().items():
        print(f"    {w}: {hex(f)},")
