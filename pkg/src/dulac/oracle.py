"""Direct-integration ground truth for D(s) and T(s), and least-squares fits.

The polar-factor-free field x1 P1 d/dx1 + x2 P2 d/dx2 is integrated in
logarithmic coordinates y_i = log x_i, where it reads y_i' = P_i(e^y1, e^y2),
with the Dulac time carried as t' = x1^n1 x2^n2.  The linear saddle is then a
constant field, integrated exactly.
"""

import csv
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np
from scipy.integrate import solve_ivp

from .algebra import poly1_eval, poly_eval
from .expansion import omega_eval


class NoCrossingWithinTauMax(RuntimeError):
    pass


class IntegratorFailure(RuntimeError):
    pass


class IllConditioned(RuntimeError):
    pass


class DegenerateData(ValueError):
    pass


RTOL = 1e-12
ATOL = 1e-13


@dataclass
class OracleSample:
    s: float
    D: float
    T: float
    steps: int = 0
    err_est: float = 0.0


@dataclass
class FitResult:
    basis: list
    coeffs: np.ndarray
    residual_norm: float
    condition: float
    trusted: bool
    scale: np.ndarray = field(default=None, repr=False)

    def as_dict(self):
        return {tuple(b): float(c) for b, c in zip(self.basis, self.coeffs)}


def _section_param(target, x2, s_guess=None):
    """Solve comp2(p) = x2 for p by Newton (target sections end on the x1-axis)."""
    c2 = target.comp2
    dc2 = [k * c for k, c in enumerate(c2)][1:] or [0.0]
    p = x2 / target.d(2, 1) if s_guess is None else s_guess
    for _ in range(50):
        f = poly1_eval(c2, p) - x2
        step = f / poly1_eval(dc2, p)
        p -= step
        if abs(step) <= 1e-16 * max(1.0, abs(p)):
            break
    return p


def flow_to_section(fam, start, target, tau_max=200.0, rtol=RTOL, atol=ATOL):
    """Integrate from `start` until the orbit meets `target`.

    Returns (s_out, tau, t, nsteps) with s_out the section parameter of the
    crossing point, tau the field time and t the Dulac time.
    """
    x1, x2 = float(start[0]), float(start[1])
    if not (x1 > 0 and x2 > 0):
        raise ValueError("start must lie in the open first quadrant")
    P1, P2, n1, n2 = fam.P1, fam.P2, fam.n1, fam.n2

    def rhs(tau, y):
        a, b = np.exp(y[0]), np.exp(y[1])
        return [poly_eval(P1, a, b), poly_eval(P2, a, b), a**n1 * b**n2]

    def residual(tau, y):
        a, b = np.exp(y[0]), np.exp(y[1])
        p = _section_param(target, b)
        return a - poly1_eval(target.comp1, p)

    residual.terminal = True
    residual.direction = 1.0
    y0 = [np.log(x1), np.log(x2), 0.0]
    sol = solve_ivp(rhs, (0.0, tau_max), y0, method="DOP853", rtol=rtol, atol=atol,
                    events=residual, dense_output=False)
    if sol.status == -1:
        raise IntegratorFailure(sol.message)
    if not sol.t_events[0].size:
        raise NoCrossingWithinTauMax(f"no crossing within tau_max = {tau_max}")
    tau = float(sol.t_events[0][0])
    # Re-integrate to the located crossing so the endpoint is a true step
    # endpoint, then polish with Newton steps along the flow.
    sol2 = solve_ivp(rhs, (0.0, tau), y0, method="DOP853", rtol=rtol, atol=atol)
    y = sol2.y[:, -1]
    for _ in range(3):
        r = residual(tau, y)
        f = np.asarray(rhs(tau, y))
        a, b = np.exp(y[0]), np.exp(y[1])
        p = _section_param(target, b)
        dc1 = poly1_eval([k * c for k, c in enumerate(target.comp1)][1:] or [0.0], p)
        dc2 = poly1_eval([k * c for k, c in enumerate(target.comp2)][1:] or [0.0], p)
        dr = a * f[0] - dc1 / dc2 * b * f[1]
        dtau = -r / dr
        if abs(dtau) < 1e-15:
            break
        y = y + dtau * f
        tau += dtau
    b = np.exp(y[1])
    return _section_param(target, b), tau, float(y[2]), int(sol.t.size + sol2.t.size)


def sample_dulac(fam, sec1, sec2, s_list, rtol=RTOL, atol=ATOL, estimate_error=True):
    """One OracleSample per s; err_est compares against a 10x looser run."""
    out = []
    for s in s_list:
        s = float(s)
        start = sec1(s)
        D, tau, T, steps = flow_to_section(fam, start, sec2, rtol=rtol, atol=atol)
        err = 0.0
        if estimate_error:
            D2, _, T2, _ = flow_to_section(fam, start, sec2, rtol=10 * rtol, atol=10 * atol)
            err = max(abs(D2 - D) / abs(D), abs(T2 - T) / max(abs(T), 1e-300))
        out.append(OracleSample(s, D, T, steps, err))
    return out


# High-precision route.  Fits that resolve the fourth and later coefficients
# have condition numbers near 1e16, beyond what double-precision samples
# support, so the field is also integrated by a Taylor series method in
# mpmath arithmetic (the polynomial field gives exact coefficient recursions).

HP_DPS = 34
HP_DEGREE = 28


def _mp_poly1(coeffs, x):
    acc = mp.mpf(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _taylor_step(mono1, mono2, n1, n2, x1, x2, t, N):
    """Taylor coefficients (degree N) of x1, x2, t at the current point."""
    zero = mp.mpf(0)
    a = [x1] + [zero] * N
    b = [x2] + [zero] * N
    c = [t] + [zero] * N
    need_i = max([i for i, _, _ in mono1] + [i - 1 for i, _, _ in mono2] + [n1, 1])
    need_j = max([j - 1 for _, j, _ in mono1] + [j for _, j, _ in mono2] + [n2, 1])
    # pa[i][k]: k-th coefficient of x1^i, built one order at a time
    pa = [[mp.mpf(1)] + [zero] * N] + [[zero] * (N + 1) for _ in range(need_i)]
    pb = [[mp.mpf(1)] + [zero] * N] + [[zero] * (N + 1) for _ in range(need_j)]
    fsum = mp.fsum
    for k in range(N):
        for i in range(1, need_i + 1):
            prev = pa[i - 1]
            pa[i][k] = fsum(prev[m] * a[k - m] for m in range(k + 1))
        for j in range(1, need_j + 1):
            prev = pb[j - 1]
            pb[j][k] = fsum(prev[m] * b[k - m] for m in range(k + 1))

        def mono(i, j):
            u, v = pa[i], pb[j]
            return fsum(u[m] * v[k - m] for m in range(k + 1))

        f1 = fsum(cc * mono(i, j) for i, j, cc in mono1)
        f2 = fsum(cc * mono(i, j) for i, j, cc in mono2)
        a[k + 1] = f1 / (k + 1)
        b[k + 1] = f2 / (k + 1)
        c[k + 1] = mono(n1, n2) / (k + 1)
    return a, b, c


def flow_to_section_hp(fam, start, target, dps=HP_DPS, degree=HP_DEGREE, tau_max=200.0):
    """High-precision counterpart of flow_to_section (mpf results).

    Integrates the field in the original coordinates with a fixed-degree
    Taylor method and locates the crossing by Newton on the local series.
    """
    with mp.workdps(dps):
        x1, x2 = mp.mpf(start[0]), mp.mpf(start[1])
        if not (x1 > 0 and x2 > 0):
            raise ValueError("start must lie in the open first quadrant")
        # x1 P1 and x2 P2 as monomial lists
        mono1 = [(i + 1, j, mp.mpf(cf)) for (i, j), cf in fam.P1.coeffs.items() if cf]
        mono2 = [(i, j + 1, mp.mpf(cf)) for (i, j), cf in fam.P2.coeffs.items() if cf]
        c1 = [mp.mpf(v) for v in target.comp1]
        c2 = [mp.mpf(v) for v in target.comp2]
        dc1 = [k * v for k, v in enumerate(c1)][1:] or [mp.mpf(0)]
        dc2 = [k * v for k, v in enumerate(c2)][1:] or [mp.mpf(0)]
        tol = mp.mpf(10) ** (2 - dps)
        eps = mp.mpf(10) ** (-dps)

        def param(y2):
            p = y2 / c2[1]
            for _ in range(100):
                dp = (_mp_poly1(c2, p) - y2) / _mp_poly1(dc2, p)
                p -= dp
                if abs(dp) <= eps * (1 + abs(p)):
                    break
            return p

        def resid(a, b, h):
            y1, y2 = _mp_poly1(a, h), _mp_poly1(b, h)
            p = param(y2)
            r = y1 - _mp_poly1(c1, p)
            d1 = _mp_poly1([k * v for k, v in enumerate(a)][1:], h)
            d2 = _mp_poly1([k * v for k, v in enumerate(b)][1:], h)
            return r, d1 - _mp_poly1(dc1, p) / _mp_poly1(dc2, p) * d2, p

        t = mp.mpf(0)
        tau = mp.mpf(0)
        steps = 0
        N = degree
        while tau < tau_max:
            a, b, c = _taylor_step(mono1, mono2, fam.n1, fam.n2, x1, x2, t, N)
            h = None
            for ser in (a, b):
                for k in (N - 1, N):
                    if ser[k] != 0:
                        hk = (tol * abs(ser[0]) / abs(ser[k])) ** (mp.mpf(1) / k)
                        h = hk if h is None else min(h, hk)
            h = mp.mpf(0.9) * h
            r_end = resid(a, b, h)[0]
            if r_end >= 0:
                lo, hi = mp.mpf(0), h
                z = h / 2
                for _ in range(200):
                    r, dr, p = resid(a, b, z)
                    if r < 0:
                        lo = z
                    else:
                        hi = z
                    znew = z - r / dr if dr != 0 else (lo + hi) / 2
                    if not lo < znew < hi:
                        znew = (lo + hi) / 2
                    if abs(znew - z) <= eps * (1 + abs(z)):
                        z = znew
                        break
                    z = znew
                r, _, p = resid(a, b, z)
                return p, tau + z, _mp_poly1(c, z), steps + 1
            x1, x2, t = _mp_poly1(a, h), _mp_poly1(b, h), _mp_poly1(c, h)
            tau += h
            steps += 1
        raise NoCrossingWithinTauMax(f"no crossing within tau_max = {tau_max}")


def sample_dulac_hp(fam, sec1, sec2, s_list, dps=HP_DPS, degree=HP_DEGREE):
    """Samples with mpf values of s, D and T (err_est left at 0)."""
    out = []
    with mp.workdps(dps):
        for s in s_list:
            s = mp.mpf(s)
            start = (_mp_poly1([mp.mpf(v) for v in sec1.comp1], s),
                     _mp_poly1([mp.mpf(v) for v in sec1.comp2], s))
            D, _, T, steps = flow_to_section_hp(fam, start, sec2, dps, degree)
            out.append(OracleSample(s, D, T, steps, 0.0))
    return out


def fit_series_hp(s, y, basis, lam, alpha=0.0, prefactor=0.0, dps=HP_DPS, solve_dps=90):
    """fit_series on mpf data; the QR solve runs at solve_dps digits."""
    basis = [tuple(b) for b in basis]
    if len(s) < len(basis) + 2:
        raise DegenerateData("need at least #basis + 2 samples")
    with mp.workdps(solve_dps):
        lam_m, alpha_m, pre = mp.mpf(lam), mp.mpf(alpha), mp.mpf(prefactor)
        m, n = len(s), len(basis)
        A = mp.matrix(m, n)
        for r, sv in enumerate(s):
            sv = mp.mpf(sv)
            if abs(alpha_m) > 0:
                w = mp.expm1(-alpha_m * mp.log(sv)) / alpha_m
            else:
                w = -mp.log(sv)
            for col, (i, j, k) in enumerate(basis):
                A[r, col] = sv ** (pre + i + lam_m * j) * w**k
        scale = [mp.sqrt(mp.fsum(A[r, col] ** 2 for r in range(m))) for col in range(n)]
        for col in range(n):
            for r in range(m):
                A[r, col] /= scale[col]
        rhs = mp.matrix([mp.mpf(v) for v in y])
        try:
            x, res = mp.qr_solve(A, rhs)
        except ValueError as exc:
            raise IllConditioned(f"high-precision solve failed: {exc}") from None
        sv = mp.svd_r(A, compute_uv=False)
        cond = float(max(sv) / min(sv)) if min(sv) > 0 else np.inf
        coef = np.array([float(x[c] / scale[c]) for c in range(n)])
    return FitResult(basis, coef, float(res), cond, True, np.array([float(v) for v in scale]))


def fit_coefficients_hp(samples, basis, lam, kind="map", alpha=0.0, **kw):
    s = [sm.s for sm in samples]
    if kind == "map":
        return fit_series_hp(s, [sm.D for sm in samples], basis, lam, alpha, prefactor=lam, **kw)
    return fit_series_hp(s, [sm.T for sm in samples], basis, lam, alpha, prefactor=0.0, **kw)


def write_samples_csv(samples, path, header_lines=()):
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(["s", "D", "T", "err_est"])
        for sm in samples:
            w.writerow([repr(sm.s), repr(sm.D), repr(sm.T), repr(sm.err_est)])


def design_matrix(s, basis, lam, alpha=0.0, prefactor=0.0):
    """Columns s^(prefactor + i + lam j) * omega(s; alpha)^r for (i, j, r) in basis."""
    s = np.asarray(s, dtype=float)
    w = omega_eval(s, alpha) if any(b[2] for b in basis) else None
    cols = []
    for i, j, r in basis:
        col = s ** (prefactor + i + lam * j)
        if r:
            col = col * w**r
        cols.append(col)
    return np.column_stack(cols)


def fit_series(s, y, basis, lam, alpha=0.0, prefactor=0.0, cond_limit=1e12, raise_ill=False):
    """Least-squares fit of y(s) on the given exponent basis (column-scaled)."""
    basis = [tuple(b) for b in basis]
    if len(s) < len(basis) + 2:
        raise DegenerateData("need at least #basis + 2 samples")
    A = design_matrix(s, basis, lam, alpha, prefactor)
    scale = np.linalg.norm(A, axis=0)
    As = A / scale
    coef, _, _, sv = np.linalg.lstsq(As, np.asarray(y, dtype=float), rcond=None)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
    res = float(np.linalg.norm(As @ coef - y))
    trusted = cond <= cond_limit
    if raise_ill and not trusted:
        raise IllConditioned(f"condition estimate {cond:.3g} exceeds {cond_limit:.0e}")
    return FitResult(basis, coef / scale, res, cond, trusted, scale)


def fit_coefficients(samples, basis, lam, kind="map", alpha=0.0, **kw):
    s = np.array([sm.s for sm in samples])
    if kind == "map":
        y = np.array([sm.D for sm in samples])
        return fit_series(s, y, basis, lam, alpha, prefactor=lam, **kw)
    y = np.array([sm.T for sm in samples])
    return fit_series(s, y, basis, lam, alpha, prefactor=0.0, **kw)


def remainder_slope(s, residual):
    """Slope of log|residual| against log s."""
    s = np.asarray(s, dtype=float)
    r = np.abs(np.asarray(residual, dtype=float))
    if s.size < 8 or np.any(r == 0) or np.any(~np.isfinite(r)):
        raise DegenerateData("need at least 8 nonzero finite residuals")
    slope, _ = np.polyfit(np.log(s), np.log(r), 1)
    return float(slope)


def series_basis(lam, L, k=(0, 0), log_tol=1e-9):
    """Fit basis (i, j, r) with i + lam j <= L on the lattice with offset k.

    Indices whose exponents coincide (lam resonant) are merged into one
    representative, the one with the smallest j, carrying powers r = 0..m-1
    of the compensator, m being the number of merged indices.
    """
    pts = []
    for j in range(int(L / lam) + 1):
        for i in range(int(L) + 1):
            if i + lam * j <= L + 1e-12 and ((j == 0 and i >= k[0]) or j >= k[1]):
                pts.append((i, j))
    pts.sort(key=lambda t: (t[0] + lam * t[1], t[1]))
    out = []
    g = 0
    while g < len(pts):
        e = pts[g][0] + lam * pts[g][1]
        m = 1
        while g + m < len(pts) and abs(pts[g + m][0] + lam * pts[g + m][1] - e) <= log_tol:
            m += 1
        out.extend((*pts[g], r) for r in range(m))
        g += m
    return out
