# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the sequential walk and drifted Brownian paths.

Draw-for-draw equivalent to ``_pure``: both consume the generator's bit
stream through numpy's C distribution functions, so traces are bitwise
reproducible across backends.
"""

from libc.math cimport expm1, log, sqrt
from libc.string cimport memset
from cpython.pycapsule cimport PyCapsule_GetPointer

import numpy as np

cimport numpy as cnp
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport (binomial_t, random_binomial,
                                           random_standard_normal,
                                           random_standard_uniform)

cnp.import_array()

STOP_HORIZON = 0
STOP_BUDGET = 1
STOP_FROZEN = 2

cdef int _HORIZON = 0
cdef int _BUDGET = 1
cdef int _FROZEN = 2

cdef double LOG_U_MIN = -36.7368005696771014
cdef double U_MIN = 2.0 ** -53


cdef bitgen_t *_bitgen(bit_generator):
    return <bitgen_t *> PyCapsule_GetPointer(bit_generator.capsule, "BitGenerator")


def run_walk(generator, lam_coef, n_vertices, horizon, patch_limit=-1,
             freeze_step=-1, record_children=True):
    """See ``hypercrit._kernels._pure.run_walk``."""
    cdef double[::1] coef = np.ascontiguousarray(lam_coef, dtype=np.float64)
    cdef cnp.int64_t n_vert = n_vertices
    cdef cnp.int64_t hor = horizon
    cdef cnp.int64_t plimit = patch_limit
    cdef cnp.int64_t fstep = freeze_step
    cdef bint record = record_children

    cdef cnp.int64_t n_terms = coef.shape[0]
    children_obj = np.empty(hor if record else 0, dtype=np.int32)
    cdef cnp.int32_t[::1] children = children_obj
    newmin_obj = np.empty(1024, dtype=np.int64)
    cdef cnp.int64_t[::1] newmin = newmin_obj
    cdef cnp.int64_t nm_cap = newmin.shape[0]
    cdef cnp.int64_t nm_n = 0

    cdef binomial_t binom
    memset(&binom, 0, sizeof(binomial_t))
    cdef bitgen_t *rng = _bitgen(generator.bit_generator)

    cdef cnp.int64_t i, m, j, jmax, eligible, c
    cdef cnp.int64_t z = 0, patches = 1, min_z = 0
    cdef cnp.int64_t n_steps = hor
    cdef int reason = _HORIZON
    cdef double lam, falling, rho

    with generator.bit_generator.lock, nogil:
        for i in range(1, hor + 1):
            m = i - 1
            lam = 0.0
            falling = 1.0
            jmax = m if m < n_terms - 1 else n_terms - 1
            for j in range(jmax + 1):
                lam += coef[j] * falling
                falling *= m - j
            rho = -expm1(-lam)
            eligible = n_vert - m - z - patches
            if eligible < 0:
                eligible = 0
            c = random_binomial(rng, rho, eligible, &binom)
            z += c - 1
            if record:
                children[i - 1] = <cnp.int32_t> c
            if z < min_z:
                min_z = z
                if nm_n == nm_cap:
                    with gil:
                        newmin_obj = np.concatenate(
                            [newmin_obj, np.empty(nm_cap, dtype=np.int64)])
                        newmin = newmin_obj
                        nm_cap = newmin.shape[0]
                newmin[nm_n] = i
                nm_n += 1
                if i < hor:
                    if fstep >= 0 and i > fstep:
                        n_steps = i
                        reason = _FROZEN
                        break
                    if plimit >= 0 and patches == plimit:
                        n_steps = i
                        reason = _BUDGET
                        break
                    patches += 1

    if record:
        # copy early-stopped traces so the full horizon buffer can be freed
        out_children = children_obj[:n_steps]
        if n_steps < hor:
            out_children = out_children.copy()
    else:
        out_children = None
    return out_children, newmin_obj[:nm_n].copy(), int(n_steps), reason


def wk_segment(generator, out, mu, k, dt, start_step, x0, rmin0, last_min_step0,
               use_bridge=True):
    """See ``hypercrit._kernels._pure.wk_segment``."""
    cdef double[::1] buf = out
    cdef double c_mu = mu
    cdef int c_k = k
    cdef double c_dt = dt
    cdef cnp.int64_t step = start_step
    cdef double x = x0
    cdef double rmin = rmin0
    cdef cnp.int64_t last_min_step = last_min_step0
    cdef bint bridge = use_bridge

    cdef bitgen_t *rng = _bitgen(generator.bit_generator)

    cdef double sqrt_dt = sqrt(c_dt)
    cdef double c_drift = c_mu / (c_k - 1.0)
    cdef double skip_gap = 0.5 * sqrt(-2.0 * c_dt * LOG_U_MIN)
    cdef cnp.int64_t j, n = buf.shape[0]
    cdef int r
    cdef double t1, t2, p1, p2, x2, lo, u, d, m

    with generator.bit_generator.lock, nogil:
        for j in range(n):
            t1 = step * c_dt
            t2 = (step + 1) * c_dt
            p1 = 1.0
            p2 = 1.0
            for r in range(c_k - 1):
                p1 *= t1
                p2 *= t2
            x2 = x + sqrt_dt * random_standard_normal(rng) + c_drift * (p2 - p1)
            lo = x2 if x2 < x else x
            if bridge:
                if lo - rmin < skip_gap:
                    u = random_standard_uniform(rng)
                    if u < U_MIN:
                        u = U_MIN
                    d = x2 - x
                    m = 0.5 * (x + x2 - sqrt(d * d - 2.0 * c_dt * log(u)))
                    if m < rmin:
                        rmin = m
                        last_min_step = step + 1
            elif x2 < rmin:
                rmin = x2
                last_min_step = step + 1
            buf[j] = x2
            x = x2
            step += 1

    return x, rmin, int(last_min_step)
