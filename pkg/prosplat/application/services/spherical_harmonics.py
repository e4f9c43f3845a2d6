"""Real spherical-harmonics color evaluation (degrees 0..3)."""

import numpy as np

SH_C0 = 0.28209479177387814
SH_C1 = 0.4886025119029199
SH_C2 = (
    1.0925484305920792,
    -1.0925484305920792,
    0.31539156525252005,
    -1.0925484305920792,
    0.5462742152960396,
)
SH_C3 = (
    -0.5900435899266435,
    2.890611442640554,
    -0.4570457994644658,
    0.3731763325901154,
    -0.4570457994644658,
    1.4453057213202769,
    -0.5900435899266435,
)


def eval_sh(degree: int, coeffs: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """
    Evaluate SH color along a unit view direction.

    Parameters
    ----------
    degree    : SH degree to evaluate, clipped to what ``coeffs`` holds.
    coeffs    : ((deg+1)^2, 3) coefficients.
    direction : unit 3-vector from the camera center toward the primitive.

    Returns
    -------
    RGB in [0, 1] (the DC offset of 0.5 is added, then clipped).
    """
    available = int(round(np.sqrt(coeffs.shape[0]))) - 1
    degree = max(0, min(degree, available))
    result = SH_C0 * coeffs[0]

    if degree >= 1:
        x, y, z = direction
        result = (result
                  - SH_C1 * y * coeffs[1]
                  + SH_C1 * z * coeffs[2]
                  - SH_C1 * x * coeffs[3])

        if degree >= 2:
            xx, yy, zz = x * x, y * y, z * z
            xy, yz, xz = x * y, y * z, x * z
            result = (result
                      + SH_C2[0] * xy * coeffs[4]
                      + SH_C2[1] * yz * coeffs[5]
                      + SH_C2[2] * (2.0 * zz - xx - yy) * coeffs[6]
                      + SH_C2[3] * xz * coeffs[7]
                      + SH_C2[4] * (xx - yy) * coeffs[8])

            if degree >= 3:
                result = (result
                          + SH_C3[0] * y * (3.0 * xx - yy) * coeffs[9]
                          + SH_C3[1] * xy * z * coeffs[10]
                          + SH_C3[2] * y * (4.0 * zz - xx - yy) * coeffs[11]
                          + SH_C3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy) * coeffs[12]
                          + SH_C3[4] * x * (4.0 * zz - xx - yy) * coeffs[13]
                          + SH_C3[5] * z * (xx - yy) * coeffs[14]
                          + SH_C3[6] * x * (xx - 3.0 * yy) * coeffs[15])

    return np.clip(result + 0.5, 0.0, 1.0)


def rgb_to_sh_dc(rgb) -> np.ndarray:
    return (np.asarray(rgb, dtype=np.float64) - 0.5) / SH_C0


def sh_dc_to_rgb(dc) -> np.ndarray:
    return np.clip(np.asarray(dc, dtype=np.float64) * SH_C0 + 0.5, 0.0, 1.0)
