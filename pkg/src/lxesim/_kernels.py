"""Low-level numba kernels for the stabilizer tableau and percolation oracle.

Layout conventions shared by all kernels:

- A Pauli mask is a ``(w,)`` uint64 array; bit ``j`` of site ``j`` lives in
  word ``j // 64`` at position ``j % 64``.
- A signed Pauli is ``(-1)**sign`` times the Hermitian canonical operator for
  its masks (per-site I/X/Z/Y, with Y for an overlapping x/z bit).
- A state is a pair of row blocks: stabilizer rows ``sx, sz, ssign`` and
  destabilizer rows ``dx, dz`` (masks only; destabilizer phases are never
  observable).  Row ``i < k`` is live.  Pairing invariant: destabilizer ``i``
  anticommutes with stabilizer ``i`` and commutes with every other stabilizer.

Event codes for the trajectory runners are in ``EV_*`` below; events carry an
explicit partner site so the kernels stay agnostic of boundary conditions.
"""

import numpy as np
from numba import njit

EV_MEASURE_ZZ = 0
EV_MEASURE_X = 1
EV_MEASURE_ZIZ = 2
EV_MEASURE_XX = 3
EV_UNITARY = 4
EV_NOISE = 5

_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)
_ONE = np.uint64(1)


@njit(cache=True, inline="always")
def _popcount(x):
    x = x - ((x >> _ONE) & _M1)
    x = (x & _M2) + ((x >> np.uint64(2)) & _M2)
    x = (x + (x >> np.uint64(4))) & _M4
    return np.int64((x * _H01) >> np.uint64(56))


@njit(cache=True, inline="always")
def _anticommutes(ax, az, bx, bz):
    """Symplectic product parity of two Pauli masks (1 = anticommute)."""
    acc = np.int64(0)
    for j in range(ax.shape[0]):
        acc += _popcount(ax[j] & bz[j]) + _popcount(az[j] & bx[j])
    return acc & 1


@njit(cache=True, inline="always")
def _product_phase(ax, az, bx, bz):
    """i-exponent (mod 4) of canonical(a) * canonical(b).

    Per-site rule: cyclic X->Y->Z->X contributes +i, anticyclic -i.
    For commuting operands the result is 0 or 2.
    """
    plus = np.int64(0)
    minus = np.int64(0)
    for j in range(ax.shape[0]):
        x1 = ax[j]
        z1 = az[j]
        x2 = bx[j]
        z2 = bz[j]
        p = (x1 & z1 & ~x2 & z2) | (x1 & ~z1 & x2 & z2) | (~x1 & z1 & x2 & ~z2)
        m = (x1 & z1 & x2 & ~z2) | (x1 & ~z1 & ~x2 & z2) | (~x1 & z1 & x2 & z2)
        plus += _popcount(p)
        minus += _popcount(m)
    return (plus - minus) & 3


@njit(cache=True, inline="always")
def _get_bit(mask, site):
    return np.int64((mask[site >> 6] >> np.uint64(site & 63)) & _ONE)


@njit(cache=True, inline="always")
def _set_bit(mask, site):
    mask[site >> 6] |= _ONE << np.uint64(site & 63)


@njit(cache=True)
def _row_mul(sx, sz, ssign, dst, src):
    """Stabilizer row product: row[dst] <- row[dst] * row[src] (commuting)."""
    ph = _product_phase(sx[dst], sz[dst], sx[src], sz[src])
    sgn = np.int64(ssign[dst]) ^ np.int64(ssign[src])
    if ph == 2:
        sgn ^= 1
    for j in range(sx.shape[1]):
        sx[dst, j] ^= sx[src, j]
        sz[dst, j] ^= sz[src, j]
    ssign[dst] = np.uint8(sgn)


@njit(cache=True)
def _group_element(sx, sz, ssign, dx, dz, k, ox, oz, qx, qz):
    """Candidate decomposition of (ox, oz) over the stabilizer rows.

    Writes the product of every stabilizer row whose destabilizer partner
    anticommutes with the operator into (qx, qz) and returns its sign bit.
    The caller decides membership by comparing masks.
    """
    for j in range(qx.shape[0]):
        qx[j] = np.uint64(0)
        qz[j] = np.uint64(0)
    sgn = np.int64(0)
    phase = np.int64(0)
    for i in range(k):
        if _anticommutes(dx[i], dz[i], ox, oz):
            phase = (phase + _product_phase(qx, qz, sx[i], sz[i])) & 3
            for j in range(qx.shape[0]):
                qx[j] ^= sx[i, j]
                qz[j] ^= sz[i, j]
            sgn ^= np.int64(ssign[i])
    if phase == 2:
        sgn ^= 1
    return sgn


@njit(cache=True)
def _masks_equal(ax, az, bx, bz):
    for j in range(ax.shape[0]):
        if ax[j] != bx[j] or az[j] != bz[j]:
            return False
    return True


@njit(cache=True)
def _find_destabilizer(sx, sz, k, n, ox, oz, vx, vz):
    """Solve for v with <v, s_i> = 0 for all rows and <v, op> = 1.

    Gaussian elimination over the (k+1) x (2n+1) augmented bit matrix whose
    rows are the symplectic duals of the stabilizers plus the operator.
    Always solvable when op is independent of the stabilizer span.
    """
    w = sx.shape[1]
    rows = k + 1
    # Row layout: [z-part | x-part] so that M . (vx || vz) = symplectic products.
    m = np.zeros((rows, 2 * w), dtype=np.uint64)
    rhs = np.zeros(rows, dtype=np.uint8)
    for i in range(k):
        for j in range(w):
            m[i, j] = sz[i, j]
            m[i, w + j] = sx[i, j]
    for j in range(w):
        m[k, j] = oz[j]
        m[k, w + j] = ox[j]
    rhs[k] = 1

    pivot_col = np.full(rows, -1, dtype=np.int64)
    r = 0
    for col in range(2 * n):
        # Columns [0, n) live in the z-word block, [n, 2n) in the x block.
        if col < n:
            word = col >> 6
            bitpos = np.uint64(col & 63)
        else:
            word = w + ((col - n) >> 6)
            bitpos = np.uint64((col - n) & 63)
        sel = -1
        for i in range(r, rows):
            if (m[i, word] >> bitpos) & _ONE:
                sel = i
                break
        if sel < 0:
            continue
        if sel != r:
            for j in range(2 * w):
                tmp = m[r, j]
                m[r, j] = m[sel, j]
                m[sel, j] = tmp
            t = rhs[r]
            rhs[r] = rhs[sel]
            rhs[sel] = t
        for i in range(rows):
            if i != r and ((m[i, word] >> bitpos) & _ONE):
                for j in range(2 * w):
                    m[i, j] ^= m[r, j]
                rhs[i] ^= rhs[r]
        pivot_col[r] = col
        r += 1
        if r == rows:
            break

    for j in range(w):
        vx[j] = np.uint64(0)
        vz[j] = np.uint64(0)
    # Reduced form: pivot variables take the rhs directly (free vars = 0).
    for i in range(r):
        if rhs[i]:
            col = pivot_col[i]
            if col < n:
                _set_bit(vx, col)
            else:
                _set_bit(vz, col - n)
    return 0


@njit(cache=True)
def measure_kernel(sx, sz, ssign, dx, dz, k, n, ox, oz, osign, forced, coin):
    """Projective measurement of a signed Pauli.

    osign: 0 for +op, 1 for -op.  forced: -1 for none, else 0 (+1 outcome)
    or 1 (-1 outcome).  Returns (outcome_bit, was_random, new_k, status);
    status 1 flags a forced outcome contradicting a deterministic value, 2 an
    attempted rank overflow (cannot happen for valid Hermitian input).
    """
    w = sx.shape[1]
    p = -1
    for i in range(k):
        if _anticommutes(sx[i], sz[i], ox, oz):
            p = i
            break
    if p >= 0:
        for i in range(p + 1, k):
            if _anticommutes(sx[i], sz[i], ox, oz):
                _row_mul(sx, sz, ssign, i, p)
        for i in range(k):
            if i != p and _anticommutes(dx[i], dz[i], ox, oz):
                for j in range(w):
                    dx[i, j] ^= sx[p, j]
                    dz[i, j] ^= sz[p, j]
        for j in range(w):
            dx[p, j] = sx[p, j]
            dz[p, j] = sz[p, j]
        outcome = coin if forced < 0 else forced
        for j in range(w):
            sx[p, j] = ox[j]
            sz[p, j] = oz[j]
        ssign[p] = np.uint8(outcome ^ osign)
        return outcome, np.int64(1), k, np.int64(0)

    qx = np.empty(w, dtype=np.uint64)
    qz = np.empty(w, dtype=np.uint64)
    qsign = _group_element(sx, sz, ssign, dx, dz, k, ox, oz, qx, qz)
    if _masks_equal(qx, qz, ox, oz):
        outcome = qsign ^ osign
        if forced >= 0 and forced != outcome:
            return outcome, np.int64(0), k, np.int64(1)
        return outcome, np.int64(0), k, np.int64(0)

    # Commutes with the full group but is absent: rank grows by one.
    if k >= n:
        return np.int64(0), np.int64(0), k, np.int64(2)
    vx = np.empty(w, dtype=np.uint64)
    vz = np.empty(w, dtype=np.uint64)
    _find_destabilizer(sx, sz, k, n, ox, oz, vx, vz)
    for i in range(k):
        if _anticommutes(dx[i], dz[i], ox, oz):
            for j in range(w):
                dx[i, j] ^= vx[j]
                dz[i, j] ^= vz[j]
    outcome = coin if forced < 0 else forced
    for j in range(w):
        sx[k, j] = ox[j]
        sz[k, j] = oz[j]
        dx[k, j] = vx[j]
        dz[k, j] = vz[j]
    ssign[k] = np.uint8(outcome ^ osign)
    return outcome, np.int64(1), k + 1, np.int64(0)


@njit(cache=True)
def dephase_kernel(sx, sz, ssign, dx, dz, k, ox, oz):
    """Kraus-pair dephasing channel for a Pauli: rank drops by one or no-op."""
    w = sx.shape[1]
    p = -1
    for i in range(k):
        if _anticommutes(sx[i], sz[i], ox, oz):
            p = i
            break
    if p < 0:
        return k
    for i in range(p + 1, k):
        if _anticommutes(sx[i], sz[i], ox, oz):
            _row_mul(sx, sz, ssign, i, p)
    last = k - 1
    if p != last:
        for j in range(w):
            sx[p, j] = sx[last, j]
            sz[p, j] = sz[last, j]
            dx[p, j] = dx[last, j]
            dz[p, j] = dz[last, j]
        ssign[p] = ssign[last]
    return last


@njit(cache=True)
def contains_kernel(sx, sz, ssign, dx, dz, k, ox, oz):
    """Group membership up to sign: 0 absent, 1 -> +op, 2 -> -op in group."""
    for i in range(k):
        if _anticommutes(sx[i], sz[i], ox, oz):
            return np.int64(0)
    w = sx.shape[1]
    qx = np.empty(w, dtype=np.uint64)
    qz = np.empty(w, dtype=np.uint64)
    qsign = _group_element(sx, sz, ssign, dx, dz, k, ox, oz, qx, qz)
    if not _masks_equal(qx, qz, ox, oz):
        return np.int64(0)
    return np.int64(1) if qsign == 0 else np.int64(2)


@njit(cache=True)
def conj_2q_kernel(sx, sz, ssign, dx, dz, k, q0, q1, newcode, flip):
    """Conjugate all rows by a 2-qubit Clifford given as a 16-entry code table.

    Local code = x0 | z0<<1 | x1<<2 | z1<<3 over sites (q0, q1).
    """
    w0 = q0 >> 6
    b0 = np.uint64(q0 & 63)
    w1 = q1 >> 6
    b1 = np.uint64(q1 & 63)
    c0 = ~(_ONE << b0)
    c1 = ~(_ONE << b1)
    for i in range(k):
        code = (
            ((sx[i, w0] >> b0) & _ONE)
            | (((sz[i, w0] >> b0) & _ONE) << _ONE)
            | (((sx[i, w1] >> b1) & _ONE) << np.uint64(2))
            | (((sz[i, w1] >> b1) & _ONE) << np.uint64(3))
        )
        nc = np.uint64(newcode[code])
        sx[i, w0] = (sx[i, w0] & c0) | ((nc & _ONE) << b0)
        sz[i, w0] = (sz[i, w0] & c0) | (((nc >> _ONE) & _ONE) << b0)
        sx[i, w1] = (sx[i, w1] & c1) | (((nc >> np.uint64(2)) & _ONE) << b1)
        sz[i, w1] = (sz[i, w1] & c1) | (((nc >> np.uint64(3)) & _ONE) << b1)
        ssign[i] ^= flip[code]

        code = (
            ((dx[i, w0] >> b0) & _ONE)
            | (((dz[i, w0] >> b0) & _ONE) << _ONE)
            | (((dx[i, w1] >> b1) & _ONE) << np.uint64(2))
            | (((dz[i, w1] >> b1) & _ONE) << np.uint64(3))
        )
        nc = np.uint64(newcode[code])
        dx[i, w0] = (dx[i, w0] & c0) | ((nc & _ONE) << b0)
        dz[i, w0] = (dz[i, w0] & c0) | (((nc >> _ONE) & _ONE) << b0)
        dx[i, w1] = (dx[i, w1] & c1) | (((nc >> np.uint64(2)) & _ONE) << b1)
        dz[i, w1] = (dz[i, w1] & c1) | (((nc >> np.uint64(3)) & _ONE) << b1)


@njit(cache=True)
def conj_1q_kernel(sx, sz, ssign, dx, dz, k, q0, newcode, flip):
    """Conjugate all rows by a 1-qubit Clifford (4-entry code table)."""
    w0 = q0 >> 6
    b0 = np.uint64(q0 & 63)
    c0 = ~(_ONE << b0)
    for i in range(k):
        code = ((sx[i, w0] >> b0) & _ONE) | (((sz[i, w0] >> b0) & _ONE) << _ONE)
        nc = np.uint64(newcode[code])
        sx[i, w0] = (sx[i, w0] & c0) | ((nc & _ONE) << b0)
        sz[i, w0] = (sz[i, w0] & c0) | (((nc >> _ONE) & _ONE) << b0)
        ssign[i] ^= flip[code]
        code = ((dx[i, w0] >> b0) & _ONE) | (((dz[i, w0] >> b0) & _ONE) << _ONE)
        nc = np.uint64(newcode[code])
        dx[i, w0] = (dx[i, w0] & c0) | ((nc & _ONE) << b0)
        dz[i, w0] = (dz[i, w0] & c0) | (((nc >> _ONE) & _ONE) << b0)


@njit(cache=True)
def conj_x_kernel(sz, ssign, k, site):
    """Conjugate by X_site: flips signs of rows with a Z bit at the site."""
    word = site >> 6
    bit = np.uint64(site & 63)
    for i in range(k):
        ssign[i] ^= np.uint8((sz[i, word] >> bit) & _ONE)


@njit(cache=True, inline="always")
def _event_op(kind, site, site2, opx, opz):
    for j in range(opx.shape[0]):
        opx[j] = np.uint64(0)
        opz[j] = np.uint64(0)
    if kind == EV_MEASURE_ZZ or kind == EV_MEASURE_ZIZ:
        _set_bit(opz, site)
        _set_bit(opz, site2)
    elif kind == EV_MEASURE_X:
        _set_bit(opx, site)
    else:  # EV_MEASURE_XX
        _set_bit(opx, site)
        _set_bit(opx, site2)


@njit(cache=True)
def run_sample_kernel(
    sx, sz, ssign, dx, dz, k, n,
    ev_kind, ev_site, ev_site2, ev_aux,
    gate_newcode, gate_flip,
    coins, noise_bits,
    rec_out, rec_rand,
):
    """Run a circuit on a state, drawing outcomes; records every measurement.

    Consumes one bit from ``coins`` per random measurement and one from
    ``noise_bits`` per noise slot, in event order.  Outcomes land in
    ``rec_out`` as +/-1 (0 for non-measurement events).
    """
    w = sx.shape[1]
    opx = np.empty(w, dtype=np.uint64)
    opz = np.empty(w, dtype=np.uint64)
    cptr = 0
    nptr = 0
    for e in range(ev_kind.shape[0]):
        kind = ev_kind[e]
        if kind == EV_UNITARY:
            conj_2q_kernel(
                sx, sz, ssign, dx, dz, k,
                ev_site[e], ev_site2[e],
                gate_newcode[ev_aux[e]], gate_flip[ev_aux[e]],
            )
        elif kind == EV_NOISE:
            if noise_bits[nptr]:
                conj_x_kernel(sz, ssign, k, ev_site[e])
            nptr += 1
        else:
            _event_op(kind, ev_site[e], ev_site2[e], opx, opz)
            outcome, was_random, k, _ = measure_kernel(
                sx, sz, ssign, dx, dz, k, n,
                opx, opz, np.int64(0), np.int64(-1), np.int64(coins[cptr]),
            )
            if was_random:
                cptr += 1
            rec_out[e] = np.int8(1 - 2 * outcome)
            rec_rand[e] = np.uint8(was_random)
    return k


@njit(cache=True)
def run_replay_kernel(
    sx, sz, ssign, dx, dz, k, n,
    ev_kind, ev_site, ev_site2, ev_aux,
    gate_newcode, gate_flip,
    rec_out, in_scope,
):
    """Replay a record on a state; returns 1 if compatible, 0 otherwise.

    In-scope measurements are forced to the recorded outcome (halting on a
    deterministic mismatch); out-of-scope measurements become dephasing
    channels; noise slots are skipped.
    """
    w = sx.shape[1]
    opx = np.empty(w, dtype=np.uint64)
    opz = np.empty(w, dtype=np.uint64)
    for e in range(ev_kind.shape[0]):
        kind = ev_kind[e]
        if kind == EV_UNITARY:
            conj_2q_kernel(
                sx, sz, ssign, dx, dz, k,
                ev_site[e], ev_site2[e],
                gate_newcode[ev_aux[e]], gate_flip[ev_aux[e]],
            )
        elif kind == EV_NOISE:
            continue
        else:
            _event_op(kind, ev_site[e], ev_site2[e], opx, opz)
            if in_scope[e]:
                forced = np.int64((1 - rec_out[e]) >> 1)
                _, _, k, status = measure_kernel(
                    sx, sz, ssign, dx, dz, k, n,
                    opx, opz, np.int64(0), forced, np.int64(0),
                )
                if status == 1:
                    return np.int64(0), k
            else:
                k = dephase_kernel(sx, sz, ssign, dx, dz, k, opx, opz)
    return np.int64(1), k


@njit(cache=True)
def equivalence_scan_kernel(
    L, T, nb, seed_lo, seed_hi,
    rho_sx, rho_sz, rho_ssign, rho_dx, rho_dz, rho_k,
    sig_sx, sig_sz, sig_ssign, sig_dx, sig_dz, sig_k,
    start, stop,
):
    """Exhaustive LXE-vs-percolation comparison over placement patterns.

    Pattern integer bit (t*(nb+L) + b) turns on ZZ bond b of step t; bit
    (t*(nb+L) + nb + i) turns on the X measurement of site i.  Returns the
    number of patterns in [start, stop) where the replay indicator differs
    from bottom-block-to-top connectivity.
    """
    w = rho_sx.shape[1]
    n = L
    asx = np.empty_like(rho_sx)
    asz = np.empty_like(rho_sz)
    assign = np.empty_like(rho_ssign)
    adx = np.empty_like(rho_dx)
    adz = np.empty_like(rho_dz)
    opx = np.empty(w, dtype=np.uint64)
    opz = np.empty(w, dtype=np.uint64)
    slots = T * (nb + L)
    rec = np.empty(slots, dtype=np.int64)
    h = np.empty((T, nb), dtype=np.uint8)
    v = np.empty((T, L), dtype=np.uint8)
    mismatches = np.int64(0)

    for pat in range(start, stop):
        # xorshift stream for the sampling coins
        s = np.uint64(pat * 2654435761 + 997)
        asx[:] = rho_sx
        asz[:] = rho_sz
        assign[:] = rho_ssign
        adx[:] = rho_dx
        adz[:] = rho_dz
        k = rho_k
        for slot in range(slots):
            if not (pat >> slot) & 1:
                rec[slot] = 0
                continue
            t = slot // (nb + L)
            c = slot % (nb + L)
            if c < nb:
                _event_op(EV_MEASURE_ZZ, c, (c + 1) % L, opx, opz)
            else:
                _event_op(EV_MEASURE_X, c - nb, -1, opx, opz)
            s ^= s << np.uint64(13)
            s ^= s >> np.uint64(7)
            s ^= s << np.uint64(17)
            coin = np.int64((s >> np.uint64(33)) & _ONE)
            outcome, _, k, _ = measure_kernel(
                asx, asz, assign, adx, adz, k, n,
                opx, opz, np.int64(0), np.int64(-1), coin,
            )
            rec[slot] = outcome

        asx[:] = sig_sx
        asz[:] = sig_sz
        assign[:] = sig_ssign
        adx[:] = sig_dx
        adz[:] = sig_dz
        k = sig_k
        compatible = np.int64(1)
        for slot in range(slots):
            if not (pat >> slot) & 1:
                continue
            t = slot // (nb + L)
            c = slot % (nb + L)
            if c < nb:
                _event_op(EV_MEASURE_ZZ, c, (c + 1) % L, opx, opz)
            else:
                _event_op(EV_MEASURE_X, c - nb, -1, opx, opz)
            _, _, k, status = measure_kernel(
                asx, asz, assign, adx, adz, k, n,
                opx, opz, np.int64(0), rec[slot], np.int64(0),
            )
            if status == 1:
                compatible = np.int64(0)
                break

        for t in range(T):
            for b in range(nb):
                h[t, b] = np.uint8((pat >> (t * (nb + L) + b)) & 1)
            for i in range(L):
                v[t, i] = np.uint8(1 - ((pat >> (t * (nb + L) + nb + i)) & 1))
        sp = spans_kernel(h, v, L, T, seed_lo, seed_hi)
        if sp != compatible:
            mismatches += 1
    return mismatches


@njit(cache=True)
def apply_gate_seq_kernel(sx, sz, ssign, dx, dz, k, sites, sites2, gate_ids,
                          gate_newcode, gate_flip):
    """Apply a sequence of 2-qubit table gates (scrambling stage)."""
    for g in range(sites.shape[0]):
        conj_2q_kernel(
            sx, sz, ssign, dx, dz, k,
            sites[g], sites2[g],
            gate_newcode[gate_ids[g]], gate_flip[gate_ids[g]],
        )


@njit(cache=True, inline="always")
def _uf_find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True, inline="always")
def _uf_union(parent, size, a, b):
    ra = _uf_find(parent, a)
    rb = _uf_find(parent, b)
    if ra == rb:
        return
    if size[ra] < size[rb]:
        ra, rb = rb, ra
    parent[rb] = ra
    size[ra] += size[rb]


@njit(cache=True)
def spans_kernel(h_bonds, v_bonds, L, T, seed_lo, seed_hi):
    """Seed-cluster-to-top-row connectivity on the (T+1) x L site lattice.

    Horizontal bonds of row t join (t,i)-(t,i+1); vertical bonds join
    (t,i)-(t+1,i); h_bonds has L-1 columns (open) or L (periodic, wrapping
    bond L-1 to 0).  Sites seed_lo..seed_hi-1 of row 0 are pre-joined.
    """
    n_sites = (T + 1) * L
    parent = np.empty(n_sites, dtype=np.int32)
    size = np.ones(n_sites, dtype=np.int32)
    for i in range(n_sites):
        parent[i] = i
    for i in range(seed_lo + 1, seed_hi):
        _uf_union(parent, size, seed_lo, i)
    n_h = h_bonds.shape[1]
    for t in range(T):
        base = t * L
        for b in range(n_h):
            if h_bonds[t, b]:
                _uf_union(parent, size, base + b, base + (b + 1) % L)
        for i in range(L):
            if v_bonds[t, i]:
                _uf_union(parent, size, base + i, base + L + i)
    root = _uf_find(parent, seed_lo)
    top = T * L
    for i in range(L):
        if _uf_find(parent, top + i) == root:
            return np.int64(1)
    return np.int64(0)
