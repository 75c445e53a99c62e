# cython: language_level=3
"""Compiled twins of the _pure kernels.

Same expressions in the same order as _pure.py; compiled with
-ffp-contract=off so results stay bit-identical to the Python fallback.
"""


def track_hold(double[::1] out, double[::1] noise, double alpha, int delay_steps,
               double target, double start_force, double bias, bint visual):
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t k, j
    cdef double u = start_force
    cdef double fb, f
    for k in range(n):
        if visual:
            j = k - 1 - delay_steps
            fb = out[j] if j >= 0 else start_force
        else:
            fb = u
        u = u + alpha * (target - fb)
        f = u + bias + noise[k]
        if f < 0.0:
            f = 0.0
        out[k] = f
    return n


def play_round(double[::1] coin_x, double[::1] coin_level,
               unsigned char[::1] collected, double[::1] forces,
               double[::1] alts, double[::1] noise,
               double dt, double alpha_alt, double alpha_track,
               int delay_steps, double bias, double base_speed, double ramp,
               double cap_factor, double buffer_n, double run_length,
               double max_force, int coin_value):
    cdef Py_ssize_t n_coins = coin_x.shape[0]
    cdef Py_ssize_t max_ticks = noise.shape[0]
    cdef double alt = 0.0
    cdef double x = 0.0
    cdef double t = 0.0
    cdef double u = 0.0
    cdef double speed = base_speed
    cdef Py_ssize_t ci = 0
    cdef long score = 0
    cdef bint finished = False
    cdef Py_ssize_t ticks = 0
    cdef Py_ssize_t k, j
    cdef double level, fb, f, rampv, dalt
    for k in range(max_ticks):
        level = coin_level[ci] if ci < n_coins else coin_level[n_coins - 1]
        j = k - 1 - delay_steps
        fb = alts[j] if j >= 0 else 0.0
        u = u + alpha_track * (level - fb)
        f = u + bias + noise[k]
        if f < 0.0:
            f = 0.0
        forces[k] = f

        if f > max_force:
            f = max_force
        alt = alt + (f - alt) * alpha_alt
        if alt < 0.0:
            alt = 0.0
        elif alt > max_force:
            alt = max_force
        alts[k] = alt
        x = x + speed * dt
        t = t + dt
        rampv = 1.0 + ramp * t
        if rampv > cap_factor:
            rampv = cap_factor
        speed = base_speed * rampv
        while ci < n_coins and x >= coin_x[ci]:
            dalt = alt - coin_level[ci]
            if -buffer_n <= dalt <= buffer_n:
                collected[ci] = 1
                score += coin_value
            ci += 1
        ticks = k + 1
        if x >= run_length:
            finished = True
            break
    return ticks, score, finished
