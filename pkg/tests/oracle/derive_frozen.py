"""Independent high-precision oracle for the frozen reference values.

Uses 40-digit arithmetic, the modal form of the duct Green's function and a
single-layer density on the screen column.  It shares no code with the
package.  Run ``python tests/oracle/derive_frozen.py`` to regenerate the
values pasted into ``tests/frozen_values.py``.
"""
import mpmath as mp

mp.mp.dps = 40


def inside_root(gamma):
    d = mp.sqrt(gamma * gamma - 4)
    r1, r2 = (-gamma + d) / 2, (-gamma - d) / 2
    if abs(abs(r1) - 1) < mp.mpf(10) ** -30:
        return r1 if mp.im(r1) > 0 else r2
    return r1 if abs(r1) < 1 else r2


def solve(n1, n2, N1, N2, omega, p):
    omega = mp.mpf(omega)
    N = N1 + N2
    th = [mp.pi * j / N for j in range(1, N)]
    a = [inside_root(omega ** 2 - 4 + 2 * mp.cos(t)) for t in th]

    def green(k, n, n0):
        return mp.fsum(2 / mp.mpf(N) * mp.sin(t * (n + N1)) * mp.sin(t * (n0 + N1))
                       * aj ** abs(k) / (aj - 1 / aj) for t, aj in zip(th, a))

    rows = list(range(-n1, n2 + 1))
    sp = lambda k: 2j * mp.sin(th[p - 1] * k)
    A = mp.matrix([[green(0, n, n0) for n0 in rows] for n in rows])
    rhs = mp.matrix([-sp(n + N1) for n in rows])
    sig = mp.lu_solve(A, rhs)

    def u(m, n):
        return mp.fsum(green(m, n, n0) * s for n0, s in zip(rows, sig))

    amps = {}
    for q in range(1, N):
        t, aq = th[q - 1], a[q - 1]
        amps[q] = mp.fsum(2 / mp.mpf(N) * mp.sin(t * (n0 + N1)) * s
                          for n0, s in zip(rows, sig)) / ((aq - 1 / aq) * 2j)
    return u, amps


def show(label, value):
    value = complex(value)
    print(f"    {label!r}: complex({value.real!r}, {value.imag!r}),")


if __name__ == "__main__":
    cases = {
        "sym_10_10": (0, 9, 10, 19, "1.5", 1),
        "sym_4_5_p3": (0, 4, 4, 8, "1.7", 3),
        "sym_3_5": (0, 4, 3, 7, "1.2", 1),
        "sym_3_5_p5": (0, 4, 3, 7, "1.8", 5),
        "asym_15_13": (0, 9, 15, 13, "0.5", 1),
    }
    for name, (n1, n2, N1, N2, om, p) in cases.items():
        u, amps = solve(n1, n2, N1, N2, om, p)
        print(f"{name} = {{")
        show("u_lower", u(0, -n1 - 1))
        show("u_upper", u(0, n2 + 1))
        show("u_1_0", u(1, 0))
        show("u_3_-1", u(3, -1))
        for q in (1, 3):
            show(f"M_{q}", amps[q])
        print("}")
