"""High-precision reference values frozen in the test suite.

Independent of the package: mpmath quadrature at 30 digits along the
conserved first-integral level C of the optimal flow, with the admissible
w = p_dot + p_e taken from the polynomial roots of the level equation.
Requires mpmath (installed with the sympy test extra).
"""

import mpmath as mp

mp.mp.dps = 30


def w_of(p, c):
    x = 1 - 2 * p
    roots = mp.polyroots([x - c, -(2 * p * x + c * x), x * p * p], maxsteps=200, extraprec=60)
    good = [mp.re(z) for z in roots if abs(mp.im(z)) < mp.mpf(10) ** -20 and 0 < mp.re(z) < p]
    assert len(good) == 1, good
    return good[0]


def _pieces(eps):
    return [eps, eps * 10, 0.4, 0.5 - 1e-3, 0.5]


def duration(c, eps):
    return mp.quad(lambda p: 1 / (p - w_of(p, c)), _pieces(eps))


def work(c, eps):
    return mp.quad(lambda p: mp.log(1 + (1 - 2 * p) / w_of(p, c)), _pieces(eps))


def level_at(eps, lam):
    w = (1 - 2 * eps) / mp.expm1(lam)
    v, x = w - eps, 1 - 2 * eps
    return v * v * x / (w * (w + x))


def quasistatic(e):
    return mp.log(2) + e * mp.log(e) + (1 - e) * mp.log(1 - e)


def unbounded(tau, eps, lam_guess):
    lc = mp.findroot(lambda l: duration(mp.exp(l), eps) - tau, mp.log(level_at(eps, lam_guess)),
                     solver="secant", tol=1e-20)
    j = work(mp.exp(lc), eps)
    return j, j - quasistatic(eps)


def touched(tau, eps, lm, t_guess):
    n = 1 / mp.expm1(lm)
    rate = 2 * n + 1
    p_inf = n / rate

    def p_tail(t):
        return p_inf + (eps - p_inf) * mp.exp(-rate * (t - tau))

    t_star = mp.findroot(lambda t: duration(level_at(p_tail(t), lm), p_tail(t)) - t, t_guess,
                         solver="secant", tol=1e-20)
    p_star = p_tail(t_star)
    j1 = work(level_at(p_star, lm), p_star)
    j2 = lm * (p_star - eps)
    return t_star, j1, j2, j1 + j2 - quasistatic(eps)


def main() -> None:
    eps5 = mp.mpf("1e-5")
    print("tau_c2(15, 1e-5) =", mp.nstr(duration(level_at(eps5, 15), eps5), 15))
    for tau, guess in ((25, 8.4445), (100, 7.5)):
        j, wex = unbounded(tau, mp.mpf("1e-3"), guess)
        print(f"unbounded tau={tau} eps=1e-3: J =", mp.nstr(j, 15), " W_ex =", mp.nstr(wex, 15))
    t_star, j1, j2, wex = touched(20, eps5, 15, 18.2)
    print("touched tau=20: t* =", mp.nstr(t_star, 15), " J1 =", mp.nstr(j1, 15),
          " J2 =", mp.nstr(j2, 15), " W_ex =", mp.nstr(wex, 15))


if __name__ == "__main__":
    main()
