import numpy as np
import pytest

from actuplace.model import Instance

def pytest_terminal_summary(terminalreporter, exitstatus, config):
    # acceptance tests append one "criterion NN PASS/FAIL: ..." line each;
    # printed with the pytest summary so they survive output capture
    from tests._acceptance_log import LINES

    if not LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for line in sorted(LINES):
        terminalreporter.write_line(line)


def make_instance(rng, n, m, bound=5.0, psi_scale=2.0):
    """Random dense instance with symmetric force bounds.

    Columns are rescaled to unit peak so no column is degenerate.
    """
    U = rng.standard_normal((n, m))
    U /= np.max(np.abs(U), axis=0)
    psi = psi_scale * rng.standard_normal(n)
    lo = -bound * np.ones(m)
    hi = bound * np.ones(m)
    return Instance(psi=psi, U=U, f_lower=lo, f_upper=hi)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def jitter_params(params, rng, scale=0.1):
    """Shift every parameter (biases included) off its init value.

    Freshly initialized nets have all-zero biases, so an input row whose
    first-layer units all go dead lands later pre-activations exactly on
    the ReLU kink, where finite differences and the subgradient convention
    legitimately disagree.  Gradients are only checked at generic points.
    """
    for grp in params.groups():
        for W, b in grp:
            W += rng.uniform(-scale, scale, size=W.shape)
            b += rng.uniform(-scale, scale, size=b.shape)


def fd_gradient_check(params, loss_fn, grads, h=1e-5):
    """Central-difference check of every parameter entry.

    Returns one max relative error per parameter array, ordered as
    params.groups() flattened to (W, b) pairs.  The denominator is floored
    at 1e-6: a parameter the loss is provably flat in has analytic gradient
    0 and a finite-difference estimate that is pure roundoff, so a raw
    relative error there measures noise, not correctness.
    """
    p_arrs = [a for grp in params.groups() for Wb in grp for a in Wb]
    g_arrs = [a for grp in grads.groups() for Wb in grp for a in Wb]
    worsts = []
    for p_arr, g_arr in zip(p_arrs, g_arrs):
        worst = 0.0
        it = np.nditer(p_arr, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = p_arr[idx]
            p_arr[idx] = orig + h
            lp = loss_fn(params)
            p_arr[idx] = orig - h
            lm = loss_fn(params)
            p_arr[idx] = orig
            fd = (lp - lm) / (2.0 * h)
            an = g_arr[idx]
            rel = abs(fd - an) / max(abs(fd), abs(an), 1e-6)
            if rel > worst:
                worst = rel
        worsts.append(worst)
    return worsts
