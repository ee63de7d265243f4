"""Band-limited coordinate-network toolkit.

Thin wrapper over the C++ core: RC-GAUSS / baseline activations,
wavelet-energy-guided encoding, PSNR/SSIM/IoU, training pipelines for image
fitting / super-resolution / denoising / occupancy, and the spectral
diagnostics (empirical NTK, STFT, time-frequency uncertainty).
"""

from flair_inr._core import (  # noqa: F401
    UNCERTAINTY_LOWER_BOUND,
    activation,
    add_noise,
    bilateral_filter,
    denoise,
    dwt2,
    energy_map,
    fit_image,
    fit_occupancy,
    guided_filter,
    idwt2,
    iou,
    model_predict,
    normalize_scores,
    ntk_eigenvalues,
    positional_encode,
    psnr,
    rc_basis,
    rc_gauss,
    ssim,
    stft_line,
    super_resolve,
    uncertainty_product,
)

__version__ = "0.1.0"
