"""Floating-point differential geometry on the dense torus orbit.

Conventions, fixed once by requiring the flat chart to reproduce the
textbook flat-space data exactly (and re-verified numerically on chart
construction):

* log coordinates z = x + i y; the ambient point is stored as the
  2m-vector (x, y);
* symplectic form  omega = sum_jk F_jk dx^j ^ dy^k  with F the potential
  Hessian; metric g = omega(., J .), J dx = dy;
* moment map mu(x) = grad F(x)  (flat case: mu_j = exp(2 x_j)/2);
* the torus parameter v acts by y -> y + 2 pi v, so level-set data
  (zeta, c) lives on <mu(x), zeta_i> = c_i and the torus directions of
  an immersed level set are (0, 2 pi zeta_i);
* time is the rational flow variable tau (= 2 pi times the geometric
  time); with it the motion law reads  omega(dF/dtau, F_* Y) =
  -2 pi <gamma, Y>  for Y in the slicing span.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    DegenerateFrame,
    DegeneratePotential,
    EmptyLevelSet,
    MeshTooCoarse,
    StepSizeFailure,
)
from .potentials import Potential

PI = np.pi
DEFAULT_STEP = 1e-4


class TorusChart:
    """Dense-orbit chart of a toric manifold with a distinguished integer
    vector pairing to one with every fan ray (the holomorphic-volume
    direction)."""

    def __init__(self, potential: Potential, gamma):
        self.potential = potential
        self.gamma = np.asarray([float(g) for g in gamma])
        self.m = potential.m
        if len(self.gamma) != self.m:
            raise ValueError("gamma dimension mismatch")
        self._verify_normalization()

    # -- ambient tensors ------------------------------------------------

    def hess(self, x) -> np.ndarray:
        h = self.potential.hess(x)
        try:
            np.linalg.cholesky(h)
        except np.linalg.LinAlgError as e:
            raise DegeneratePotential(f"Hessian not positive definite at x={x}") from e
        return h

    def moment(self, x) -> np.ndarray:
        return self.potential.grad(x)

    def omega(self, x, V, W) -> float:
        h = self.hess(x)
        vx, vy = V[: self.m], V[self.m:]
        wx, wy = W[: self.m], W[self.m:]
        return float(vx @ h @ wy - wx @ h @ vy)

    def metric(self, x, V, W) -> float:
        h = self.hess(x)
        vx, vy = V[: self.m], V[self.m:]
        wx, wy = W[: self.m], W[self.m:]
        return float(vx @ h @ wx + vy @ h @ wy)

    @staticmethod
    def J(V) -> np.ndarray:
        m = len(V) // 2
        return np.concatenate([-V[m:], V[:m]])

    def psi(self, x) -> float:
        """Conformal factor comparing the symplectic and holomorphic
        volume densities; identically zero in the flat chart."""
        sign, logdet = np.linalg.slogdet(self.hess(x))
        assert sign > 0
        return float((self.gamma @ np.asarray(x) - 0.5 * logdet) / self.m)

    def grad_psi(self, x) -> np.ndarray:
        """Ambient gradient of psi (an x-direction field)."""
        h = self.hess(x)
        hinv = np.linalg.inv(h)
        t3 = self.potential.third(x)
        dpsi = np.array([
            (self.gamma[l] - 0.5 * np.trace(hinv @ t3[l])) / self.m for l in range(self.m)
        ])
        return np.concatenate([hinv @ dpsi, np.zeros(self.m)])

    def christoffel(self, x, V, W) -> np.ndarray:
        """Levi-Civita contraction Gamma(V, W) of the Hessian metric."""
        h = self.hess(x)
        hinv = np.linalg.inv(h)
        t3 = self.potential.third(x)
        vx, vy = V[: self.m], V[self.m:]
        wx, wy = W[: self.m], W[self.m:]

        def t(a, b):
            return np.einsum("ljk,j,k->l", t3, a, b)

        gx = 0.5 * hinv @ (t(vx, wx) - t(vy, wy))
        gy = 0.5 * hinv @ (t(vx, wy) + t(vy, wx))
        return np.concatenate([gx, gy])

    def _verify_normalization(self) -> None:
        # Hamiltonian condition d<mu, v> = -omega(X_v, .) at a probe point
        rng = np.random.default_rng(0)
        x = rng.uniform(-0.4, 0.4, self.m)
        v = rng.uniform(-1.0, 1.0, self.m)
        xv = np.concatenate([np.zeros(self.m), v])
        d = 1e-6
        for j in range(self.m):
            e = np.zeros(self.m)
            e[j] = 1.0
            fd = (self.moment(x + d * e) @ v - self.moment(x - d * e) @ v) / (2 * d)
            ana = -self.omega(x, xv, np.concatenate([e, np.zeros(self.m)]))
            if abs(fd - ana) > 1e-5 * max(1.0, abs(ana)):
                raise DegeneratePotential(
                    "moment normalization check failed; potential derivatives inconsistent"
                )


# -- sampling ------------------------------------------------------------


@dataclass
class ChartSample:
    """A point of an immersed level-set Lagrangian with its frames.

    level_frame rows are x-directions spanning the constraint kernel;
    torus_frame rows are the slicing vectors (their immersed images are
    y-directions scaled by 2 pi).  Frames are fixed at construction; the
    perturbed negative controls move x while keeping the frame.
    """

    chart: TorusChart
    zeta: np.ndarray  # (n, m)
    c: np.ndarray  # (n,)
    x: np.ndarray  # (m,)
    signs: tuple[int, ...]
    v: np.ndarray  # (m,), element of the slicing span
    level_frame: np.ndarray = field(default=None)  # (m-n, m)

    def __post_init__(self):
        if self.level_frame is None:
            self.level_frame = level_directions(self.chart, self.zeta, self.x)

    @property
    def m(self) -> int:
        return self.chart.m

    @property
    def n(self) -> int:
        return self.zeta.shape[0] if self.zeta.size else 0

    def y(self) -> np.ndarray:
        y0 = np.array([0.0 if s > 0 else PI for s in self.signs])
        return y0 + 2.0 * PI * self.v

    def point(self) -> np.ndarray:
        return np.concatenate([self.x, self.y()])

    def tangent_vectors(self) -> list[np.ndarray]:
        """Natural (unnormalized) frame: level x-directions, then the
        immersed torus directions."""
        m = self.m
        out = [np.concatenate([row, np.zeros(m)]) for row in self.level_frame]
        for zrow in self.zeta:
            out.append(np.concatenate([np.zeros(m), 2.0 * PI * zrow]))
        return out

    def orthonormal_frame(self) -> list[np.ndarray]:
        vecs = self.tangent_vectors()
        out: list[np.ndarray] = []
        for V in vecs:
            W = V.copy()
            for E in out:
                W = W - self.chart.metric(self.x, W, E) * E
            nrm = self.chart.metric(self.x, W, W) ** 0.5
            if nrm < 1e-14:
                raise DegenerateFrame("tangent frame degenerate")
            out.append(W / nrm)
        return out


def level_directions(chart: TorusChart, zeta: np.ndarray, x: np.ndarray) -> np.ndarray:
    """x-directions tangent to the level set: kernel of (zeta . Hess)."""
    m = chart.m
    if zeta.size == 0:
        return np.eye(m)
    jac = zeta @ chart.hess(x)
    _, s, vt = np.linalg.svd(jac)
    rank = int(np.sum(s > 1e-12 * s[0]))
    return vt[rank:]


def project_to_level(chart, zeta, c, x0, tol=1e-12, maxit=80):
    """Damped Newton projection onto <mu(x), zeta_i> = c_i (least-norm
    steps).  Returns None when it fails to converge."""
    zeta = np.atleast_2d(np.asarray(zeta, dtype=float))
    if zeta.size == 0:
        return np.asarray(x0, dtype=float)
    c = np.asarray(c, dtype=float)
    x = np.asarray(x0, dtype=float).copy()
    scale = max(1.0, float(np.max(np.abs(c))))
    try:
        res = zeta @ chart.moment(x) - c
        for _ in range(maxit):
            if np.max(np.abs(res)) < tol * scale:
                return x
            if np.max(np.abs(x)) > 40.0:  # runaway toward a chart boundary
                return None
            jac = zeta @ chart.hess(x)
            step, *_ = np.linalg.lstsq(jac, -res, rcond=None)
            t = 1.0
            for _ in range(40):
                cand = x + t * step
                cres = zeta @ chart.moment(cand) - c
                if np.max(np.abs(cres)) < np.max(np.abs(res)):
                    x, res = cand, cres
                    break
                t *= 0.5
            else:
                return None
    except (DegeneratePotential, np.linalg.LinAlgError):
        return None
    return x if np.max(np.abs(res)) < tol * scale else None


def sample_level_set(chart, zeta, c, count, seed, box=(-1.2, 0.6), v_scale=0.3,
                     signs=None, max_failures=200):
    """Seeded samples on the level set with random slicing-span offsets."""
    m = chart.m
    zeta = np.atleast_2d(np.asarray(zeta, dtype=float))
    if zeta.size == 0:
        zeta = np.zeros((0, m))
    c = np.asarray(c, dtype=float)
    rng = np.random.default_rng(seed)
    out: list[ChartSample] = []
    failures = 0
    while len(out) < count:
        x0 = rng.uniform(box[0], box[1], m)
        x = project_to_level(chart, zeta, c, x0)
        if x is None:
            failures += 1
            if failures >= max_failures:
                raise EmptyLevelSet(
                    f"projection failed {failures} times; level set empty in the chart box"
                )
            continue
        coeffs = rng.uniform(-v_scale, v_scale, zeta.shape[0]) if zeta.shape[0] else np.zeros(0)
        v = coeffs @ zeta if zeta.shape[0] else np.zeros(m)
        sgn = signs if signs is not None else tuple(int(s) for s in rng.choice([-1, 1], m))
        out.append(ChartSample(chart=chart, zeta=zeta, c=c, x=x, signs=sgn, v=v))
    return out


def perturbed(sample: ChartSample, delta: float, seed: int = 0) -> ChartSample:
    """Negative control: move x off the level set, keep the frozen frame."""
    rng = np.random.default_rng(seed)
    d = rng.normal(size=sample.m)
    d /= np.linalg.norm(d)
    return replace(sample, x=sample.x + delta * d, level_frame=sample.level_frame.copy())


# -- pointwise identities --------------------------------------------------


def lagrangian_residual(sample: ChartSample) -> float:
    """max |omega(e_a, e_b)| over the orthonormal tangent frame."""
    frame = sample.orthonormal_frame()
    worst = 0.0
    for i in range(len(frame)):
        for j in range(i + 1, len(frame)):
            worst = max(worst, abs(sample.chart.omega(sample.x, frame[i], frame[j])))
    return worst


def splitting_residual(sample: ChartSample) -> float:
    """max |g(X, F_* Y)| between unit level and torus directions."""
    ch = sample.chart
    worst = 0.0
    for row in sample.level_frame:
        X = np.concatenate([row, np.zeros(sample.m)])
        nx = ch.metric(sample.x, X, X) ** 0.5
        for zrow in sample.zeta:
            Y = np.concatenate([np.zeros(sample.m), 2.0 * PI * zrow])
            ny = ch.metric(sample.x, Y, Y) ** 0.5
            worst = max(worst, abs(ch.metric(sample.x, X, Y)) / (nx * ny))
    return worst


def angle_gap_mod_pi(a: float, b: float) -> float:
    d = (a - b) % PI
    return min(d, PI - d)


def lagrangian_angle(sample: ChartSample, method: str = "closed") -> float:
    """Phase of the immersion, valued in [0, pi).

    closed:   2 pi <gamma, v> + (pi/2) n
    pullback: argument of the holomorphic volume form evaluated on the
              tangent frame in complex coordinates.
    """
    ch = sample.chart
    if method == "closed":
        theta = 2.0 * PI * float(ch.gamma @ sample.v) + 0.5 * PI * sample.n
        return theta % PI
    if method != "pullback":
        raise ValueError(f"unknown method {method!r}")
    frame = sample.tangent_vectors()
    m = sample.m
    cols = [V[:m] + 1j * V[m:] for V in frame]
    mat = np.array(cols).T
    sign, logabs = np.linalg.slogdet(mat)
    if not np.isfinite(logabs) or sign == 0:
        raise DegenerateFrame("frame determinant underflow")
    z = sample.x + 1j * sample.y()
    theta = float(np.angle(sign) + np.imag(ch.gamma @ z))
    return theta % PI


# -- local patches ---------------------------------------------------------


class LocalPatch:
    """Map u -> ambient (x, y) parametrizing a neighborhood in the
    immersed Lagrangian; u splits as (level coordinates, torus
    coordinates) for level-set patches."""

    def __init__(self, chart: TorusChart, phi, dim: int, theta_fn=None, n_torus: int = 0):
        self.chart = chart
        self._phi = phi
        self.dim = dim
        self.n_torus = n_torus
        self._theta_fn = theta_fn

    def phi(self, u) -> np.ndarray:
        return self._phi(np.asarray(u, dtype=float))

    def theta(self, u) -> float:
        if self._theta_fn is not None:
            return self._theta_fn(np.asarray(u, dtype=float))
        return _pullback_theta_on_patch(self, np.asarray(u, dtype=float))

    def tangents(self, u, h=DEFAULT_STEP) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        cols = []
        for a in range(self.dim):
            e = np.zeros(self.dim)
            e[a] = h
            cols.append((self.phi(u + e) - self.phi(u - e)) / (2 * h))
        return np.array(cols)

    def metric(self, u, h=DEFAULT_STEP) -> np.ndarray:
        t = self.tangents(u, h)
        x = self.phi(u)[: self.chart.m]
        hmat = self.chart.hess(x)
        m = self.chart.m
        g = np.zeros((self.dim, self.dim))
        for a in range(self.dim):
            for b in range(a, self.dim):
                g[a, b] = g[b, a] = t[a][:m] @ hmat @ t[b][:m] + t[a][m:] @ hmat @ t[b][m:]
        return g


def level_set_patch(chart: TorusChart, sample: ChartSample) -> LocalPatch:
    """Product patch through a sample: level-set directions move x inside
    the constraint set (dependent coordinates re-solved by Newton), torus
    directions shift v along the slicing rows."""
    m, n = sample.m, sample.n
    zeta, c = sample.zeta, sample.c
    x0 = sample.x
    free, dep = _split_coordinates(chart, zeta, x0)
    y0 = np.array([0.0 if s > 0 else PI for s in sample.signs])
    v0 = sample.v.copy()
    frame = sample.level_frame  # rows: tangent x-directions at x0

    def phi(u):
        ul, ut = u[: m - n], u[m - n:]
        x = _solve_dependent(chart, zeta, c, x0, frame, ul, free, dep)
        v = v0 + (ut @ zeta if n else 0.0)
        return np.concatenate([x, y0 + 2.0 * PI * v])

    def theta(u):
        ut = u[m - n:]
        v = v0 + (ut @ zeta if n else 0.0)
        return 2.0 * PI * float(chart.gamma @ v) + 0.5 * PI * n

    return LocalPatch(chart, phi, dim=m, theta_fn=theta, n_torus=n)


def _split_coordinates(chart, zeta, x0):
    """Choose dependent coordinates making the constraint Jacobian block
    invertible (greedy pivoting)."""
    m = chart.m
    n = zeta.shape[0] if zeta.size else 0
    if n == 0:
        return list(range(m)), []
    jac = zeta @ chart.hess(x0)
    dep: list[int] = []
    work = jac.copy()
    for i in range(n):
        j = int(np.argmax(np.abs(work[i])))
        dep.append(j)
        piv = work[i, j]
        for k in range(n):
            if k != i and abs(work[k, j]) > 0:
                work[k] -= work[k, j] / piv * work[i]
        work[:, j] = 0.0
        work[i] = 0.0
    free = [j for j in range(m) if j not in dep]
    return free, dep


def _solve_dependent(chart, zeta, c, x0, frame, ul, free, dep, tol=1e-13, maxit=60):
    """x with free coordinates displaced along the level frame and the
    dependent ones re-solved so the constraints hold."""
    m = chart.m
    n = zeta.shape[0] if zeta.size else 0
    x = x0 + (ul @ frame if len(ul) else 0.0)
    if n == 0:
        return x
    scale = max(1.0, float(np.max(np.abs(c))))
    for _ in range(maxit):
        res = zeta @ chart.moment(x) - c
        if np.max(np.abs(res)) < tol * scale:
            return x
        jac = (zeta @ chart.hess(x))[:, dep]
        step = np.linalg.solve(jac, -res)
        x = x.copy()
        x[dep] += step
    raise MeshTooCoarse("constraint solve did not converge; patch step too large")


def graph_patch(chart: TorusChart, slopes) -> LocalPatch:
    """Lagrangian graph y_j = f_j(x_j) over the real chart (separable
    generating data keeps it Lagrangian for any Hessian metric of
    diagonal type); used as the curved negative-control surface."""

    def phi(u):
        y = np.array([f(u[j]) for j, f in enumerate(slopes)])
        return np.concatenate([u, y])

    return LocalPatch(chart, phi, dim=chart.m, theta_fn=None, n_torus=0)


def _pullback_theta_on_patch(patch: LocalPatch, u, h=DEFAULT_STEP) -> float:
    t = patch.tangents(u, h)
    m = patch.chart.m
    cols = [row[:m] + 1j * row[m:] for row in t]
    mat = np.array(cols).T
    sign, logabs = np.linalg.slogdet(mat)
    if not np.isfinite(logabs) or sign == 0:
        raise DegenerateFrame("frame determinant underflow")
    p = patch.phi(u)
    z = p[:m] + 1j * p[m:]
    return float(np.angle(sign) + np.imag(patch.chart.gamma @ z)) % PI


# -- curvature -------------------------------------------------------------


@dataclass(frozen=True)
class CurvatureReport:
    psi: float
    mean_curvature: np.ndarray
    generalized: np.ndarray  # K = H - m (grad psi)^perp
    j_grad_theta: np.ndarray
    residual: float  # |K - J grad theta|_g
    step_agreement: float  # |K_h - K_{h/2}|_g


def _tangential_projection(chart, x, V, tangents):
    g = np.array([[chart.metric(x, a, b) for b in tangents] for a in tangents])
    rhs = np.array([chart.metric(x, V, a) for a in tangents])
    coef = np.linalg.solve(g, rhs)
    return sum(c * a for c, a in zip(coef, tangents))


def _mean_curvature_at(patch: LocalPatch, u, h):
    ch = patch.chart
    u = np.asarray(u, dtype=float)
    t = patch.tangents(u, h)
    p0 = patch.phi(u)
    x = p0[: ch.m]
    dim = patch.dim
    g = patch.metric(u, h)
    ginv = np.linalg.inv(g)
    second = np.zeros((dim, dim, 2 * ch.m))
    for a in range(dim):
        ea = np.zeros(dim)
        ea[a] = h
        second[a, a] = (patch.phi(u + ea) - 2 * p0 + patch.phi(u - ea)) / h**2
        for b in range(a + 1, dim):
            eb = np.zeros(dim)
            eb[b] = h
            sab = (
                patch.phi(u + ea + eb)
                - patch.phi(u + ea - eb)
                - patch.phi(u - ea + eb)
                + patch.phi(u - ea - eb)
            ) / (4 * h**2)
            second[a, b] = second[b, a] = sab
    hvec = np.zeros(2 * ch.m)
    for a in range(dim):
        for b in range(dim):
            if ginv[a, b] == 0.0:
                continue
            ii_ab = second[a, b] + ch.christoffel(x, t[a], t[b])
            hvec += ginv[a, b] * ii_ab
    tangents = list(t)
    hvec -= _tangential_projection(ch, x, hvec, tangents)
    return hvec, t, g, x


def _grad_theta(patch: LocalPatch, u, h, tangents, g):
    u = np.asarray(u, dtype=float)
    dim = patch.dim
    dth = np.zeros(dim)
    th0 = patch.theta(u)
    for a in range(dim):
        e = np.zeros(dim)
        e[a] = h
        tp = patch.theta(u + e)
        tm = patch.theta(u - e)
        # realign branch cuts around th0
        tp = th0 + _wrap_half_pi(tp - th0)
        tm = th0 + _wrap_half_pi(tm - th0)
        dth[a] = (tp - tm) / (2 * h)
    coef = np.linalg.solve(g, dth)
    return sum(c * t for c, t in zip(coef, tangents))


def _wrap_half_pi(d: float) -> float:
    while d > PI / 2:
        d -= PI
    while d <= -PI / 2:
        d += PI
    return d


def psi_and_K(patch: LocalPatch, u=None, h=DEFAULT_STEP, tol=1e-3) -> CurvatureReport:
    """Generalized mean curvature versus the angle gradient.

    Everything is second-order finite differences; the same quantities
    are recomputed at half the step and a disagreement beyond 10x the
    tolerance raises StepSizeFailure.
    """
    ch = patch.chart
    u = np.zeros(patch.dim) if u is None else np.asarray(u, dtype=float)

    def compute(step):
        hvec, t, g, x = _mean_curvature_at(patch, u, step)
        gpsi = ch.grad_psi(x)
        gpsi_perp = gpsi - _tangential_projection(ch, x, gpsi, list(t))
        K = hvec - ch.m * gpsi_perp
        jgt = ch.J(_grad_theta(patch, u, step, list(t), g))
        return hvec, K, jgt, x

    _, K1, _, x = compute(h)
    hvec, K2, jgt2, _ = compute(h / 2)
    diff = K1 - K2
    agree = ch.metric(x, diff, diff) ** 0.5
    if agree > 10 * tol:
        raise StepSizeFailure(f"curvature disagrees across step halving by {agree:.3g}")
    rvec = K2 - jgt2
    residual = ch.metric(x, rvec, rvec) ** 0.5
    return CurvatureReport(
        psi=ch.psi(x),
        mean_curvature=hvec,
        generalized=K2,
        j_grad_theta=jgt2,
        residual=residual,
        step_agreement=agree,
    )


# -- weighted Laplacian ----------------------------------------------------


def weighted_laplacian(patch: LocalPatch, fn, u=None, h=1e-3) -> float:
    """Delta_f of a scalar on the patch at u, with f = -m psi pulled back.

    Sign convention: Delta is the adjoint-of-d (positive) Laplacian,
    i.e. -(1/sqrt G) d_a (sqrt G G^{ab} d_b fn), plus <grad fn, grad f>;
    with it the weighted-volume first variation along the Hamiltonian
    field of h0 equals -integral (Delta_f theta) h0 against the weighted
    volume.  All derivatives central.
    """
    ch = patch.chart
    if h <= 0 or h > 0.05:
        raise MeshTooCoarse(f"stencil spacing {h} outside the supported range")
    u = np.zeros(patch.dim) if u is None else np.asarray(u, dtype=float)
    dim = patch.dim

    def flux(up):
        g = patch.metric(up, h)
        ginv = np.linalg.inv(g)
        sq = np.linalg.det(g) ** 0.5
        base = fn(up)
        d = np.zeros(dim)
        for b in range(dim):
            e = np.zeros(dim)
            e[b] = h
            d[b] = (fn(up + e) - fn(up - e)) / (2 * h)
        return sq * (ginv @ d), d, sq, ginv

    _, d0, sq0, ginv0 = flux(u)
    div = 0.0
    for a in range(dim):
        e = np.zeros(dim)
        e[a] = h
        fp, _, _, _ = flux(u + e)
        fm, _, _, _ = flux(u - e)
        div += (fp[a] - fm[a]) / (2 * h)
    lap = -div / sq0

    def f_weight(up):
        x = patch.phi(up)[: ch.m]
        return -ch.m * ch.psi(x)

    df = np.zeros(dim)
    for b in range(dim):
        e = np.zeros(dim)
        e[b] = h
        df[b] = (f_weight(u + e) - f_weight(u - e)) / (2 * h)
    return float(lap + d0 @ ginv0 @ df)


def weighted_laplacian_theta(patch: LocalPatch, u=None, h=1e-3) -> float:
    base = patch.theta(np.zeros(patch.dim) if u is None else u)

    def theta_cont(up):
        return base + _wrap_half_pi(patch.theta(up) - base)

    return weighted_laplacian(patch, theta_cont, u=u, h=h)


# -- flow law ----------------------------------------------------------------


@dataclass(frozen=True)
class FlowResiduals:
    tangential: float  # max |omega(velocity, unit level direction)|
    span: float  # max |omega(velocity, F_* zeta_i) + 2 pi <gamma, zeta_i>|
    pairings: tuple[float, ...]
    targets: tuple[float, ...]
    velocity: np.ndarray


def flow_residual(sample: ChartSample, gamma, dtau=1e-3) -> FlowResiduals:
    """Check the motion law of the level sets in the exact time variable.

    The cross-time motion is reconstructed by re-projecting the sample
    onto nearby level sets; tangential reparametrization freedom drops
    out of both pairings because the immersion is Lagrangian.
    """
    ch = sample.chart
    gamma = np.asarray([float(g) for g in gamma])
    speeds = sample.zeta @ gamma if sample.n else np.zeros(0)
    xp = project_to_level(ch, sample.zeta, sample.c - speeds * dtau, sample.x)
    xm = project_to_level(ch, sample.zeta, sample.c + speeds * dtau, sample.x)
    if xp is None or xm is None:
        raise StepSizeFailure("level-set projection failed while differencing in time")
    vel = np.concatenate([(xp - xm) / (2 * dtau), np.zeros(sample.m)])

    worst_t = 0.0
    for row in sample.level_frame:
        X = np.concatenate([row, np.zeros(sample.m)])
        nx = ch.metric(sample.x, X, X) ** 0.5
        worst_t = max(worst_t, abs(ch.omega(sample.x, vel, X)) / nx)

    pairings = []
    targets = []
    worst_s = 0.0
    for i, zrow in enumerate(sample.zeta):
        Y = np.concatenate([np.zeros(sample.m), 2.0 * PI * zrow])
        val = ch.omega(sample.x, vel, Y)
        tgt = -2.0 * PI * float(gamma @ zrow)
        pairings.append(val)
        targets.append(tgt)
        worst_s = max(worst_s, abs(val - tgt))
    return FlowResiduals(
        tangential=worst_t,
        span=worst_s,
        pairings=tuple(pairings),
        targets=tuple(targets),
        velocity=vel,
    )


# -- first variation of the weighted volume ---------------------------------


def smooth_bump(t: float) -> float:
    a = abs(t)
    if a >= 1.0:
        return 0.0
    return float(np.exp(1.0 - 1.0 / (1.0 - a * a)))


@dataclass(frozen=True)
class FirstVariation:
    lhs: float  # d/d eps of the weighted volume under the Hamiltonian flow
    rhs: float  # -integral (Delta_f theta) h0 dV_weighted
    h0_sup: float


def _simpson_weights(npts: int, spacing: float) -> np.ndarray:
    assert npts % 2 == 1 and npts >= 3
    w = np.ones(npts)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * spacing / 3.0


def first_variation_check(patch: LocalPatch, h0, radius=0.8, npts=25, eps=1e-3,
                          h=DEFAULT_STEP) -> FirstVariation:
    """Both sides of the weighted-volume first-variation identity.

    lhs: central difference of the weighted volume along the Hamiltonian
    deformation generated by h0 (deformation field J applied to the
    surface gradient of h0, frozen on the base patch).
    rhs: quadrature of -(Delta_f theta) h0 against the weighted volume
    density.  Simpson rule on a tensor grid covering the support of h0.
    """
    ch = patch.chart
    dim = patch.dim
    if npts % 2 == 0:
        npts += 1
    axis = np.linspace(-radius, radius, npts)
    spacing = axis[1] - axis[0]
    w1 = _simpson_weights(npts, spacing)

    def h0v(u):
        return float(h0(u))

    def deformation(u):
        t = patch.tangents(u, h)
        g = patch.metric(u, h)
        dh = np.zeros(dim)
        for b in range(dim):
            e = np.zeros(dim)
            e[b] = h
            dh[b] = (h0v(u + e) - h0v(u - e)) / (2 * h)
        coef = np.linalg.solve(g, dh)
        grad = sum(c * tv for c, tv in zip(coef, t))
        return ch.J(grad)

    import itertools as it

    grid = list(it.product(range(npts), repeat=dim))

    def volume(eps_val):
        total = 0.0
        for idx in grid:
            u = np.array([axis[i] for i in idx])
            wgt = np.prod([w1[i] for i in idx])

            def phi_eps(uu):
                return patch.phi(uu) + eps_val * deformation(uu)

            cols = []
            for a in range(dim):
                e = np.zeros(dim)
                e[a] = h
                cols.append((phi_eps(u + e) - phi_eps(u - e)) / (2 * h))
            p = phi_eps(u)
            x = p[: ch.m]
            hm = ch.hess(x)
            g = np.zeros((dim, dim))
            for a in range(dim):
                for b in range(a, dim):
                    g[a, b] = g[b, a] = (
                        cols[a][: ch.m] @ hm @ cols[b][: ch.m]
                        + cols[a][ch.m:] @ hm @ cols[b][ch.m:]
                    )
            dens = np.linalg.det(g) ** 0.5 * np.exp(ch.m * ch.psi(x))
            total += wgt * dens
        return total

    lhs = (volume(eps) - volume(-eps)) / (2 * eps)

    rhs = 0.0
    sup = 0.0
    for idx in grid:
        u = np.array([axis[i] for i in idx])
        b = h0v(u)
        sup = max(sup, abs(b))
        if b == 0.0:
            continue
        wgt = np.prod([w1[i] for i in idx])
        lap = weighted_laplacian_theta(patch, u=u, h=min(1e-3, spacing / 4))
        g = patch.metric(u, h)
        x = patch.phi(u)[: ch.m]
        dens = np.linalg.det(g) ** 0.5 * np.exp(ch.m * ch.psi(x))
        rhs += -wgt * lap * b * dens
    if sup == 0.0:
        return FirstVariation(lhs=lhs, rhs=rhs, h0_sup=0.0)
    return FirstVariation(lhs=lhs, rhs=rhs, h0_sup=sup)
