"""Closed-form predictions for products of rectangular Ginibre matrices.

Notation used throughout: the product has t factors, smallest dimension
N, rectangularity offsets nu_1..nu_t, Dyson index beta. Angle brackets
denote the time average (1/t) sum_i over the offsets.

Asymptotic exponent laws:

    mu_n    = (1/2) log(2/beta) + (1/2) <psi(beta (nu+n)/2)>
    sigma_n^2 = (1/4t) <psi'(beta (nu+n)/2)>

Exact finite-time marginals f_kl(lambda; t) are densities of shifted,
scaled sums of log-gamma variables; the exact joint eigenvalue
densities carry a Meijer G weight; phase integration turns the exact
exponent law into a permanent of the diagonal (beta=2) or canonically
paired (beta=4) marginals.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import specfun
from .ensemble import DimensionProfile, DysonIndex, as_dyson
from .errors import CapabilityError, DomainError
from .permanent import permanent_ryser, vandermonde_interaction

_HALF_LOG2 = 0.5 * math.log(2.0)


@dataclass(frozen=True)
class TheoryPrediction:
    """Exponent means and variances for one ensemble configuration."""

    beta: DysonIndex
    profile: DimensionProfile
    t: int
    mu: tuple[float, ...]
    sigma2: tuple[float, ...]

    @property
    def sigma(self) -> tuple[float, ...]:
        return tuple(math.sqrt(v) for v in self.sigma2)


def _prefix(profile: DimensionProfile, t: Optional[int]) -> DimensionProfile:
    if t is None or t == profile.t:
        return profile
    return profile.prefix(t)


def _nu_counts(profile: DimensionProfile):
    """Unique offsets with multiplicities; keeps repeated-term sums exact."""
    vals, counts = np.unique(np.asarray(profile.nus, dtype=np.int64), return_counts=True)
    return [(int(v), int(c)) for v, c in zip(vals, counts)]


def lyapunov_mean(beta, profile: DimensionProfile, n: int) -> float:
    """mu_n = (1/2) log(2/beta) + (1/2) <psi(beta (nu+n)/2)>."""
    beta = as_dyson(beta)
    if not 1 <= n <= profile.n:
        raise DomainError(f"index n={n} outside 1..{profile.n}")
    avg = (
        sum(c * specfun.digamma(beta * (nu + n) / 2.0) for nu, c in _nu_counts(profile))
        / profile.t
    )
    return 0.5 * math.log(2.0 / beta) + 0.5 * avg


def lyapunov_variance(beta, profile: DimensionProfile, n: int, t: Optional[int] = None) -> float:
    """sigma_n^2 = (1/4t) <psi'(beta (nu+n)/2)>.

    t defaults to the profile length; passing a smaller t evaluates the
    variance of the partial product over the leading t factors.
    """
    beta = as_dyson(beta)
    profile = _prefix(profile, t)
    if not 1 <= n <= profile.n:
        raise DomainError(f"index n={n} outside 1..{profile.n}")
    avg = (
        sum(c * specfun.trigamma(beta * (nu + n) / 2.0) for nu, c in _nu_counts(profile))
        / profile.t
    )
    return avg / (4.0 * profile.t)


def predict(beta, profile: DimensionProfile, t: Optional[int] = None) -> TheoryPrediction:
    """Means and variances for all N exponents (optionally a prefix)."""
    beta = as_dyson(beta)
    profile = _prefix(profile, t)
    mu = tuple(lyapunov_mean(beta, profile, n) for n in range(1, profile.n + 1))
    s2 = tuple(lyapunov_variance(beta, profile, n) for n in range(1, profile.n + 1))
    return TheoryPrediction(beta, profile, profile.t, mu, s2)


# ---------------------------------------------------------------------------
# Exact finite-time marginals
# ---------------------------------------------------------------------------


def _marginal_params(beta: DysonIndex, profile: DimensionProfile, k: int, l: Optional[int]):
    """(gamma shapes a_i, scale, shift) of the log-gamma-sum law of f_kl.

    beta=1 takes a single index k in 1..N. beta=2 takes k, l in 1..N
    (l defaults to k). beta=4 indices run over 1..2N; l=None selects the
    canonical pair (2k-1, 2k), the marginal of the k-th exponent.
    """
    n = profile.n
    scale = 1.0 / (2.0 * profile.t)
    if beta == DysonIndex.REAL:
        if l is not None:
            raise DomainError("beta=1 marginals take a single index")
        if not 1 <= k <= n:
            raise DomainError(f"index k={k} outside 1..{n}")
        return tuple((nu + k) / 2.0 for nu in profile.nus), scale, _HALF_LOG2
    if beta == DysonIndex.COMPLEX:
        l = k if l is None else l
        if not (1 <= k <= n and 1 <= l <= n):
            raise DomainError(f"indices ({k},{l}) outside 1..{n}")
        return tuple(nu + (k + l) / 2.0 for nu in profile.nus), scale, 0.0
    if l is None:
        if not 1 <= k <= n:
            raise DomainError(f"index k={k} outside 1..{n}")
        k, l = 2 * k - 1, 2 * k
    if not (1 <= k <= 2 * n and 1 <= l <= 2 * n):
        raise DomainError(f"indices ({k},{l}) outside 1..{2 * n}")
    return tuple(2 * nu + (k + l + 1) / 2.0 for nu in profile.nus), scale, -_HALF_LOG2


@functools.lru_cache(maxsize=256)
def _cached_marginal(beta, profile, k, l):
    a, scale, shift = _marginal_params(beta, profile, k, l)
    return specfun.loggamma_sum_density(a, scale, shift)


def finite_t_marginal(beta, profile: DimensionProfile, k: int, l: Optional[int] = None):
    """Exact density f_kl(.; t) of one finite-time exponent.

    The returned evaluator exposes mean/variance/cdf; see
    specfun.LogGammaSumDensity. Construction is cached per
    (beta, profile, k, l).
    """
    return _cached_marginal(as_dyson(beta), profile, int(k), None if l is None else int(l))


def cumulant(
    beta,
    profile: DimensionProfile,
    k: int,
    l: Optional[int] = None,
    t: Optional[int] = None,
    order: int = 1,
) -> float:
    """n-th cumulant of f_kl: delta_{n,1} shift + (2t)^-n sum_i psi^(n-1)(a_i).

    The shift enters only the mean; it is the constant offset of the
    log-gamma-sum representation, so order 1 matches the density mean.
    """
    if order < 1:
        raise DomainError(f"cumulant order must be >= 1, got {order}")
    if order > 5:
        raise CapabilityError("cumulants available up to order 5 (polygamma order 4)")
    beta = as_dyson(beta)
    profile = _prefix(profile, t)
    a, scale, shift = _marginal_params(beta, profile, k, l)
    total = sum(specfun.polygamma(order - 1, ai) for ai in a) * scale**order
    return total + (shift if order == 1 else 0.0)


# ---------------------------------------------------------------------------
# Decoupling coefficients
# ---------------------------------------------------------------------------


def decoupling_coefficient(beta, profile: DimensionProfile, k: int, l: int, t: Optional[int] = None) -> float:
    """D_kl(t) = prod_i Gamma[nu_i+(k+l)/2] / (Gamma[nu_i+k] Gamma[nu_i+l])^(1/2).

    Off-diagonal coefficients decay exponentially in t; D_kk = 1 exactly
    (each log term cancels identically). beta=2 only.
    """
    if as_dyson(beta) != DysonIndex.COMPLEX:
        raise CapabilityError("decoupling_coefficient is the beta=2 coefficient")
    profile = _prefix(profile, t)
    n = profile.n
    if not (1 <= k <= n and 1 <= l <= n):
        raise DomainError(f"indices ({k},{l}) outside 1..{n}")
    log_d = 0.0
    for nu, c in _nu_counts(profile):
        term = (
            specfun.log_gamma(nu + (k + l) / 2.0)
            - 0.5 * specfun.log_gamma(nu + k)
            - 0.5 * specfun.log_gamma(nu + l)
        )
        log_d += c * term
    return math.exp(log_d)


def pair_coefficient(beta, profile: DimensionProfile, sigma, t: Optional[int] = None) -> float:
    """D_sigma(t) for a permutation sigma of 1..2N (beta=4).

    D_sigma = prod_i prod_n Gamma[2 nu_i + (sigma(n)+sigma(n+N)+1)/2]
                            / Gamma[2 nu_i + 2n].
    Equals 1 exactly when sigma pairs each n with a consecutive partner
    in canonical order; all other permutations decay exponentially.
    """
    if as_dyson(beta) != DysonIndex.QUATERNION:
        raise CapabilityError("pair_coefficient is the beta=4 coefficient")
    profile = _prefix(profile, t)
    n = profile.n
    sigma = tuple(int(v) for v in sigma)
    if sorted(sigma) != list(range(1, 2 * n + 1)):
        raise DomainError(f"sigma must be a permutation of 1..{2 * n}")
    log_d = 0.0
    for nu, c in _nu_counts(profile):
        term = 0.0
        for j in range(n):
            num = 2 * nu + (sigma[j] + sigma[j + n] + 1) / 2.0
            den = 2 * nu + 2 * (j + 1)
            term += specfun.log_gamma(num) - specfun.log_gamma(den)
        log_d += c * term
    return math.exp(log_d)


# ---------------------------------------------------------------------------
# Exact joint densities (desk scale)
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=200_000)
def _log_weight_scalar(beta: DysonIndex, profile: DimensionProfile, r: float) -> float:
    """log w(z) for |z| = r; -inf where the weight underflows."""
    params = specfun.MeijerParams(tuple(beta * nu / 2.0 for nu in profile.nus))
    arg = (beta / 2.0) ** profile.t * r * r
    w = specfun.meijer_g(params, arg)
    if w <= 0.0:
        return -math.inf
    return math.log(w)


def log_weight(beta, profile: DimensionProfile, r) -> float:
    """Log of the joint-density weight at eigenvalue modulus r."""
    beta = as_dyson(beta)
    r = float(r)
    if r <= 0.0:
        raise DomainError("weight requires a positive modulus")
    return _log_weight_scalar(beta, profile, r)


def log_normalization(beta, profile: DimensionProfile) -> float:
    """log Z for the exact joint eigenvalue density."""
    beta = as_dyson(beta)
    n, t = profile.n, profile.t
    lg = specfun.log_gamma
    total = math.lgamma(n + 1)
    if beta == DysonIndex.REAL:
        total += (t * n * (n + 1) / 4.0) * math.log(2.0)
        for nu, c in _nu_counts(profile):
            total += c * sum(lg((nu + m) / 2.0) for m in range(1, n + 1))
    elif beta == DysonIndex.COMPLEX:
        total += n * math.log(math.pi)
        for nu, c in _nu_counts(profile):
            total += c * sum(lg(nu + m) for m in range(1, n + 1))
    else:
        total += n * math.log(math.pi) - t * n * (n + 1) * math.log(2.0)
        for nu, c in _nu_counts(profile):
            total += c * sum(lg(2 * nu + 2 * m) for m in range(1, n + 1))
    return total


def joint_density_exact(beta, profile: DimensionProfile, points, t: Optional[int] = None) -> float:
    """Log of the exact joint eigenvalue density at the given points.

    beta=1 takes real points (the all-real sector, whose total mass is
    the probability of a fully real spectrum); beta=4 takes upper
    half-plane representatives. Desk scale: N <= 4 and t <= 4.
    """
    beta = as_dyson(beta)
    profile = _prefix(profile, t)
    if profile.n > 4 or profile.t > 4:
        raise CapabilityError("exact joint density held to N <= 4, t <= 4")
    z = np.asarray(points, dtype=np.complex128).ravel()
    if len(z) != profile.n:
        raise DomainError(f"need {profile.n} points, got {len(z)}")
    if beta == DysonIndex.REAL and np.any(z.imag != 0.0):
        raise DomainError("beta=1 points must be real")
    if beta == DysonIndex.QUATERNION and np.any(z.imag < 0.0):
        raise DomainError("beta=4 points must lie in the closed upper half plane")
    log_rho = vandermonde_interaction(int(beta), z) - log_normalization(beta, profile)
    for zn in z:
        log_rho += log_weight(beta, profile, abs(zn))
    return log_rho


# ---------------------------------------------------------------------------
# Permanental forms
# ---------------------------------------------------------------------------


def permanental_joint(beta, prediction: TheoryPrediction, lambdas, thetas) -> float:
    """Asymptotic joint density (1/N!) perm[phi(theta_l) f_k(lambda_l)].

    f_k is the Gaussian with the prediction's (mu_k, sigma_k^2); the
    phase factor is 1/2 per point mass on {0, pi} for beta=1, 1/(2 pi)
    for beta=2, and 2 sin^2(theta)/pi for beta=4.
    """
    beta = as_dyson(beta)
    lam = np.asarray(lambdas, dtype=np.float64).ravel()
    th = np.asarray(thetas, dtype=np.float64).ravel()
    n = len(prediction.mu)
    if len(lam) != n or len(th) != n:
        raise DomainError(f"need {n} exponents and phases")
    if beta == DysonIndex.REAL:
        phi = np.full(n, 0.5)
    elif beta == DysonIndex.COMPLEX:
        phi = np.full(n, 1.0 / (2.0 * math.pi))
    else:
        phi = 2.0 * np.sin(th) ** 2 / math.pi
    mu = np.asarray(prediction.mu)
    sig = np.sqrt(np.asarray(prediction.sigma2))
    # matrix [k, l] = phi(theta_l) * gaussian_k(lambda_l)
    g = np.exp(-0.5 * ((lam[None, :] - mu[:, None]) / sig[:, None]) ** 2)
    g /= np.sqrt(2.0 * math.pi) * sig[:, None]
    mat = g * phi[None, :]
    return float(permanent_ryser(mat).real) / math.factorial(n)


def exponent_joint_density(beta, profile: DimensionProfile, lambdas) -> float:
    """Exact phase-integrated exponent density (1/N!) perm[f_k(lambda_l)].

    Valid at any t for beta=2 (diagonal marginals) and beta=4 (canonical
    pair marginals); integrating the exact joint law over all phases
    leaves this permanent, so the finite-time exponents are independent
    up to symmetrization.
    """
    beta = as_dyson(beta)
    if beta == DysonIndex.REAL:
        raise CapabilityError(
            "the beta=1 phase-integrated law is not permanental at finite t"
        )
    lam = np.asarray(lambdas, dtype=np.float64).ravel()
    n = profile.n
    if len(lam) != n:
        raise DomainError(f"need {n} exponents, got {len(lam)}")
    mat = np.empty((n, n))
    for k in range(1, n + 1):
        f_k = finite_t_marginal(beta, profile, k)
        mat[k - 1, :] = f_k(lam)
    return float(permanent_ryser(mat).real) / math.factorial(n)


# ---------------------------------------------------------------------------
# Derived comparisons
# ---------------------------------------------------------------------------


def gaussian_limit_distance(density, half_width: float = 6.0, points: int = 2401) -> float:
    """Standardized sup distance sup_x |sigma f(mu + sigma x) - phi(x)|.

    density must expose mean/std and vectorized evaluation (the finite-t
    marginals do). The distance of the standardized density from the
    standard normal shrinks like t^{-1/2}.
    """
    x = np.linspace(-half_width, half_width, points)
    f = density(density.mean + density.std * x) * density.std
    phi = np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    return float(np.max(np.abs(f - phi)))


def ordering_probability(prediction: TheoryPrediction, k: int, l: int) -> float:
    """P(exponent k < exponent l) in the independent-Gaussian regime.

    (1/2) erfc[(mu_k - mu_l) / sqrt(2 sigma_k^2 + 2 sigma_l^2)]; for
    k < l this is the probability of the typical ordering.
    """
    n = len(prediction.mu)
    if not (1 <= k <= n and 1 <= l <= n) or k == l:
        raise DomainError(f"need distinct indices in 1..{n}, got ({k},{l})")
    num = prediction.mu[k - 1] - prediction.mu[l - 1]
    den = math.sqrt(2.0 * (prediction.sigma2[k - 1] + prediction.sigma2[l - 1]))
    return 0.5 * specfun.erfc(num / den)


def phase_cdf(beta, theta):
    """CDF of the asymptotic phase law on its per-beta domain.

    beta=2: uniform on [0, 2pi). beta=4: density 2 sin^2(theta)/pi on
    [0, pi], CDF (theta - sin(theta) cos(theta))/pi. beta=1 phases are
    point masses and have no continuous CDF.
    """
    beta = as_dyson(beta)
    th = np.asarray(theta, dtype=np.float64)
    if beta == DysonIndex.COMPLEX:
        return np.clip(th / (2.0 * math.pi), 0.0, 1.0)
    if beta == DysonIndex.QUATERNION:
        return np.clip((th - np.sin(th) * np.cos(th)) / math.pi, 0.0, 1.0)
    raise CapabilityError("beta=1 phases are discrete; use the pole fraction")
