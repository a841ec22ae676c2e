"""NumPy implementation of the sub-step kernel (used when the extension is absent)."""

import numpy as np


def substep(src_l, src_r, dst_l, dst_r, idx_l, idx_r, pre, post, phase_l=None, phase_r=None):
    cl = pre[0, 0] * src_l[idx_l] + pre[0, 1] * src_r[idx_l]
    cr = pre[1, 0] * src_l[idx_r] + pre[1, 1] * src_r[idx_r]
    if phase_l is not None:
        cl *= phase_l
        cr *= phase_r
    np.add(post[0, 0] * cl, post[0, 1] * cr, out=dst_l)
    np.add(post[1, 0] * cl, post[1, 1] * cr, out=dst_r)
