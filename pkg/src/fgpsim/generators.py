"""Portfolio generators and the weight maps they induce.

A generator is a positive C^2 function G of the market weight vector.  Its
portfolio weights come either from the functional-generation formula

    pi_i = mu_i * (d_i log G(mu) + 1 - sum_j mu_j d_j log G(mu))

(rule "fgp_formula"; sums to one identically) or, for the diversity family,
from the direct power map pi_i = mu_i^p / sum_j mu_j^p (rule "direct").

Built-in kinds:
  diversity(p)  G_p(mu) = sum_i mu_i^p, 0 < p < 1, strictly concave
  entropy       G(mu) = prod_i mu_i^mu_i  (literal product form; this one is
                convex on the simplex - see tangent_hessian_max_eig)
  custom        user-supplied value/grad/hessian (finite differences fill in
                missing derivatives); gibbs_entropy_generator() provides the
                concave H(mu) = -sum mu_i log mu_i alternative
"""
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .errors import ConfigError, DomainError

BOUNDARY_EPS = 1e-12
WEIGHT_RULES = ("fgp_formula", "direct")


def _require_interior(mu):
    mu = np.asarray(mu, dtype=float)
    if mu.ndim != 1 or mu.shape[0] < 2:
        raise DomainError(f"weights must be a vector of length >= 2, got shape {mu.shape}")
    if not np.isfinite(mu).all():
        raise DomainError("weights must be finite")
    if (mu <= BOUNDARY_EPS).any():
        raise DomainError(
            f"weight vector touches the simplex boundary (min {mu.min():.3e} "
            f"<= boundary eps {BOUNDARY_EPS:.0e})")
    if abs(mu.sum() - 1.0) > 1e-8:
        raise DomainError(f"weights must sum to 1, got {mu.sum()!r}")
    return mu


# builtin generator functions (module level so GeneratorSpec pickles)

def _diversity_value(p, mu):
    return float((mu ** p).sum())


def _diversity_grad(p, mu):
    return p * mu ** (p - 1.0)


def _diversity_hessian(p, mu):
    return np.diag(p * (p - 1.0) * mu ** (p - 2.0))


def _entropy_value(mu):
    return float(np.exp((mu * np.log(mu)).sum()))


def _entropy_grad(mu):
    return _entropy_value(mu) * (1.0 + np.log(mu))


def _entropy_hessian(mu):
    g = 1.0 + np.log(mu)
    return _entropy_value(mu) * (np.outer(g, g) + np.diag(1.0 / mu))


def _gibbs_value(mu):
    return float(-(mu * np.log(mu)).sum())


def _gibbs_grad(mu):
    return -(1.0 + np.log(mu))


def _gibbs_hessian(mu):
    return np.diag(-1.0 / mu)


def _constant_value(mu):
    return 1.0


def _constant_grad(mu):
    return np.zeros_like(mu)


def _constant_hessian(mu):
    return np.zeros((mu.shape[0], mu.shape[0]))


def finite_diff_grad(value_fn, mu, h=1e-6):
    """Central-difference gradient of a scalar function on the simplex ambient space."""
    mu = np.asarray(mu, dtype=float)
    g = np.empty_like(mu)
    for i in range(mu.shape[0]):
        up, dn = mu.copy(), mu.copy()
        up[i] += h
        dn[i] -= h
        g[i] = (value_fn(up) - value_fn(dn)) / (2.0 * h)
    return g


def finite_diff_hessian(value_fn, mu, h=1e-6):
    mu = np.asarray(mu, dtype=float)
    d = mu.shape[0]
    hess = np.empty((d, d))
    for j in range(d):
        up, dn = mu.copy(), mu.copy()
        up[j] += h
        dn[j] -= h
        gu = finite_diff_grad(value_fn, up, h)
        gd = finite_diff_grad(value_fn, dn, h)
        hess[:, j] = (gu - gd) / (2.0 * h)
    return 0.5 * (hess + hess.T)


@dataclass
class GeneratorSpec:
    """A portfolio generator: scalar value plus derivatives and a weight rule."""

    kind: str
    weight_rule: str = "fgp_formula"
    params: dict = field(default_factory=dict)
    value_fn: callable = None
    grad_fn: callable = None
    hessian_fn: callable = None
    name: str = ""
    expected_concave: bool = True

    def __post_init__(self):
        if self.weight_rule not in WEIGHT_RULES:
            raise ConfigError(f"unknown weight_rule {self.weight_rule!r}")
        if self.weight_rule == "direct" and self.kind != "diversity":
            raise ConfigError("weight_rule='direct' is defined only for the diversity kind")
        if self.kind == "custom" and self.value_fn is None:
            raise ConfigError("custom generators need a value function")

    def value(self, mu):
        v = float(self.value_fn(np.asarray(mu, dtype=float)))
        if not (np.isfinite(v) and v > 0):
            raise DomainError(f"generator {self.name or self.kind} not positive at mu ({v})")
        return v

    def grad(self, mu):
        mu = np.asarray(mu, dtype=float)
        if self.grad_fn is not None:
            return np.asarray(self.grad_fn(mu), dtype=float)
        return finite_diff_grad(self.value_fn, mu)

    def hessian(self, mu):
        mu = np.asarray(mu, dtype=float)
        if self.hessian_fn is not None:
            return np.asarray(self.hessian_fn(mu), dtype=float)
        return finite_diff_hessian(self.value_fn, mu)

    def weights(self, mu):
        """Portfolio weights at market weights mu, per the configured rule."""
        if self.weight_rule == "direct":
            return diversity_weights(self.params["p"], mu)
        return fgp_weights(self, mu)

    def describe(self):
        bits = [self.name or self.kind]
        if self.params:
            bits.append(",".join(f"{k}={v}" for k, v in sorted(self.params.items())))
        bits.append(self.weight_rule)
        return " ".join(bits)


def diversity_generator(p, weight_rule="direct"):
    """G_p(mu) = sum mu_i^p.  Defaults to the direct power weights pi ~ mu^p,
    which is how the diversity portfolio is defined; fgp_formula gives the
    functional-generation evaluation of the same G_p."""
    if not 0.0 < p <= 1.0:
        raise ConfigError(f"diversity exponent must lie in (0, 1], got {p}")
    return GeneratorSpec(
        kind="diversity", weight_rule=weight_rule, params={"p": float(p)},
        value_fn=partial(_diversity_value, p), grad_fn=partial(_diversity_grad, p),
        hessian_fn=partial(_diversity_hessian, p), name=f"diversity(p={p})")


def entropy_generator():
    """The literal product-form entropy generator G(mu) = prod mu_i^mu_i.

    Note this G is convex on the simplex (its tangent Hessian is positive),
    so it lacks the concavity the master inequality's drift sign relies on;
    gibbs_entropy_generator() is the standard concave alternative.
    """
    return GeneratorSpec(
        kind="entropy", weight_rule="fgp_formula", value_fn=_entropy_value,
        grad_fn=_entropy_grad, hessian_fn=_entropy_hessian,
        name="entropy(prod mu^mu)", expected_concave=False)


def gibbs_entropy_generator():
    """Concave Shannon entropy H(mu) = -sum mu_i log mu_i (kind=custom)."""
    return GeneratorSpec(
        kind="custom", weight_rule="fgp_formula", value_fn=_gibbs_value,
        grad_fn=_gibbs_grad, hessian_fn=_gibbs_hessian, name="gibbs_entropy")


def constant_generator():
    """G = 1: the functional-generation formula collapses to the market portfolio."""
    return GeneratorSpec(
        kind="custom", weight_rule="fgp_formula", value_fn=_constant_value,
        grad_fn=_constant_grad, hessian_fn=_constant_hessian, name="constant")


def custom_generator(value_fn, grad_fn=None, hessian_fn=None, name="custom"):
    return GeneratorSpec(kind="custom", weight_rule="fgp_formula", value_fn=value_fn,
                         grad_fn=grad_fn, hessian_fn=hessian_fn, name=name)


def fgp_weights(G: GeneratorSpec, mu):
    """Evaluate the functional-generation weight formula at interior mu."""
    mu = _require_interior(mu)
    dlog = G.grad(mu) / G.value(mu)
    return mu * (dlog + 1.0 - float((mu * dlog).sum()))


def diversity_weights(p, mu):
    """pi_i = mu_i^p / sum_j mu_j^p for 0 < p <= 1."""
    if not 0.0 < p <= 1.0:
        raise DomainError(f"diversity exponent must lie in (0, 1], got {p}")
    mu = _require_interior(mu)
    w = mu ** p
    return w / w.sum()


def entropy_weights(mu):
    """Weights of the product-form entropy generator via the FGP formula."""
    return fgp_weights(entropy_generator(), mu)


def excess_growth_pairwise(mu):
    """gamma*(mu) = 1/2 sum_{i<j} (mu_i - mu_j)^2, evaluated through the
    algebraic identity sum_{i<j}(mu_i - mu_j)^2 = d sum mu^2 - (sum mu)^2."""
    mu = np.asarray(mu, dtype=float)
    d = mu.shape[-1]
    s1 = mu.sum(axis=-1)
    s2 = (mu * mu).sum(axis=-1)
    out = 0.5 * (d * s2 - s1 * s1)
    return float(out) if np.ndim(out) == 0 else out


def excess_growth_classical(pi, tau):
    """Covariance-form excess growth 1/2 (sum pi_i tau_ii - pi' tau pi)."""
    pi = np.asarray(pi, dtype=float)
    tau = np.asarray(tau, dtype=float)
    if tau.shape != (pi.shape[0], pi.shape[0]):
        raise DomainError(
            f"dimension mismatch: pi has {pi.shape[0]} assets, tau is {tau.shape}")
    return float(0.5 * ((pi * np.diag(tau)).sum() - pi @ tau @ pi))


def tangent_hessian_max_eig(G: GeneratorSpec, mu):
    """Largest eigenvalue of the Hessian projected on the simplex tangent
    space {sum x = 0}.  Positive values flag a strict-concavity violation."""
    mu = _require_interior(mu)
    d = mu.shape[0]
    P = np.eye(d) - np.full((d, d), 1.0 / d)
    eig = np.linalg.eigvalsh(P @ G.hessian(mu) @ P)
    return float(eig[-1])


def weights_on_path(G: GeneratorSpec, mu_path):
    """Evaluate G's weights at every row of an (n, d) weight matrix.

    Uses closed-form vectorization for the built-in generators and falls
    back to a row loop for custom ones.
    """
    mu = np.asarray(mu_path, dtype=float)
    if mu.ndim != 2:
        raise DomainError(f"expected an (n, d) weight matrix, got shape {mu.shape}")
    if (mu <= BOUNDARY_EPS).any():
        raise DomainError("a row of the weight path touches the simplex boundary")
    if np.max(np.abs(mu.sum(axis=1) - 1.0)) > 1e-8:
        raise DomainError("weight path rows must sum to 1")

    if G.kind == "diversity":
        p = G.params["p"]
        if G.weight_rule == "direct":
            w = mu ** p
            return w / w.sum(axis=1, keepdims=True)
        dlog = p * mu ** (p - 1.0) / (mu ** p).sum(axis=1, keepdims=True)
    elif G.kind == "entropy":
        dlog = 1.0 + np.log(mu)
    elif G.name == "gibbs_entropy":
        dlog = -(1.0 + np.log(mu)) / (-(mu * np.log(mu)).sum(axis=1, keepdims=True))
    elif G.name == "constant":
        return mu.copy()
    else:
        return np.vstack([G.weights(row) for row in mu])
    return mu * (dlog + 1.0 - (mu * dlog).sum(axis=1, keepdims=True))


def log_value_on_path(G: GeneratorSpec, mu_path):
    """log G at every row of an (n, d) weight matrix (vectorized builtins)."""
    mu = np.asarray(mu_path, dtype=float)
    if G.kind == "diversity":
        return np.log((mu ** G.params["p"]).sum(axis=1))
    if G.kind == "entropy":
        return (mu * np.log(mu)).sum(axis=1)
    if G.name == "gibbs_entropy":
        return np.log(-(mu * np.log(mu)).sum(axis=1))
    if G.name == "constant":
        return np.zeros(mu.shape[0])
    return np.log([G.value(row) for row in mu])


def check_gradient(G: GeneratorSpec, mu, h=1e-6):
    """Max |declared - central difference| relative to the gradient scale."""
    mu = np.asarray(mu, dtype=float)
    fd = finite_diff_grad(G.value_fn, mu, h)
    scale = max(float(np.max(np.abs(fd))), 1e-10)
    return float(np.max(np.abs(G.grad(mu) - fd))) / scale


def check_hessian(G: GeneratorSpec, mu, h=1e-6):
    """Declared Hessian vs central differences of the gradient (differencing
    the value twice would drown the 1e-5 tolerance in eps/h^2 noise)."""
    mu = np.asarray(mu, dtype=float)
    d = mu.shape[0]
    fd = np.empty((d, d))
    for j in range(d):
        up, dn = mu.copy(), mu.copy()
        up[j] += h
        dn[j] -= h
        fd[:, j] = (G.grad(up) - G.grad(dn)) / (2.0 * h)
    fd = 0.5 * (fd + fd.T)
    scale = max(float(np.max(np.abs(fd))), 1e-8)
    return float(np.max(np.abs(G.hessian(mu) - fd))) / scale
