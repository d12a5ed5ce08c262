"""Minimum-norm Gauss-Newton iteration on x^2 + y^2 - 1 = 0 from (1.1, 0.9),
carried out in 60-digit arithmetic. Prints iterates and residuals."""
from mpmath import mp, mpf

mp.dps = 60
x, y = mpf("1.1"), mpf("0.9")
for t in range(7):
    r = x * x + y * y - 1
    print(t, mp.nstr(x, 20), mp.nstr(y, 20), mp.nstr(abs(r), 6))
    jx, jy = 2 * x, 2 * y
    s = r / (jx * jx + jy * jy)
    x, y = x - jx * s, y - jy * s
