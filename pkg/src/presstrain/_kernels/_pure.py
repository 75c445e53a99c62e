"""Pure-Python reference implementations of the hot simulation loops.

The compiled twin in _speed.pyx mirrors these functions operation for
operation: same expressions, same evaluation order, IEEE doubles throughout,
so both backends produce bit-identical outputs for identical inputs.  Keep
any edit here in lockstep with the .pyx file.
"""


def track_hold(out, noise, alpha, delay_steps, target, start_force, bias, visual):
    """Fill `out` with the force trace of one tracking hold.

    out, noise: equal-length float64 1-D arrays (noise pre-scaled to Newtons).
    alpha: per-step tracking gain (0..1).
    delay_steps: feedback latency in samples.
    target: force level being held.
    start_force: exerted force just before the hold begins.
    bias: systematic offset of the produced force vs the intent.
    visual: when true the control error is measured against the displayed
    (true) force, which servos the bias away; otherwise the error is taken
    against the intent itself and the bias persists in the output.
    """
    n = out.shape[0]
    u = start_force
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


def play_round(
    coin_x,
    coin_level,
    collected,
    forces,
    alts,
    noise,
    dt,
    alpha_alt,
    alpha_track,
    delay_steps,
    bias,
    base_speed,
    ramp,
    cap_factor,
    buffer_n,
    run_length,
    max_force,
    coin_value,
):
    """One runner-game round flown by a feedback-tracking controller.

    coin_x, coin_level: per-coin position and force level (x ascending).
    collected: uint8 output flags per coin.
    forces, alts, noise: per-tick arrays; their length bounds the tick count.
    Returns (ticks_used, score, finished).

    The game update here must stay identical to presstrain.game.tick; any
    divergence breaks the replay-equivalence tests.
    """
    n_coins = coin_x.shape[0]
    max_ticks = noise.shape[0]
    alt = 0.0
    x = 0.0
    t = 0.0
    u = 0.0
    speed = base_speed
    ci = 0
    score = 0
    finished = False
    ticks = 0
    for k in range(max_ticks):
        # controller: chase the next coin's level using the displayed altitude
        level = coin_level[ci] if ci < n_coins else coin_level[n_coins - 1]
        j = k - 1 - delay_steps
        fb = alts[j] if j >= 0 else 0.0
        u = u + alpha_track * (level - fb)
        f = u + bias + noise[k]
        if f < 0.0:
            f = 0.0
        forces[k] = f

        # game step (mirror of game.tick)
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
