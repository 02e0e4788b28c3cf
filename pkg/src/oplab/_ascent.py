"""Batched normalized-gradient ascent used by every lower-bound estimator."""
import numpy as np


def unit_frobenius(X):
    axes = tuple(range(1, X.ndim))
    nrm = np.sqrt(np.sum(np.abs(X) ** 2, axis=axes, keepdims=True))
    return X / np.where(nrm > 0, nrm, 1.0)


def maximize(fun, X0, iterations=500, step=0.5, project=unit_frobenius, min_step=1e-10):
    """Maximize ``fun`` independently from each start in the batch ``X0``.

    ``fun(X)`` returns ``(values, grads)`` where ``values`` has shape ``(R,)``
    and ``grads`` the shape of ``X`` (complex gradients packed as
    d/dRe + i d/dIm). A proposal is accepted per restart only when it
    improves the value; rejected proposals halve that restart's step.

    Returns ``(X_best, values_best, iterations_used)``.
    """
    X = project(np.asarray(X0, dtype=complex))
    R = X.shape[0]
    axes = tuple(range(1, X.ndim))
    vals, grads = fun(X)
    steps = np.full(R, float(step))
    it = 0
    for it in range(1, iterations + 1):
        gn = np.sqrt(np.sum(np.abs(grads) ** 2, axis=axes))
        active = (steps > min_step) & (gn > 0)
        if not active.any():
            break
        scale = np.where(active, steps / np.where(gn > 0, gn, 1.0), 0.0)
        Xp = project(X + scale.reshape((R,) + (1,) * (X.ndim - 1)) * grads)
        vp, gp = fun(Xp)
        ok = active & (vp > vals)
        if ok.any():
            X = np.where(ok.reshape((R,) + (1,) * (X.ndim - 1)), Xp, X)
            grads = np.where(ok.reshape((R,) + (1,) * (X.ndim - 1)), gp, grads)
            vals = np.where(ok, vp, vals)
        steps = np.where(ok, np.minimum(steps * 1.25, 1.0), steps * 0.5)
    return X, vals, it
