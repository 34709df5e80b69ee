"""Noise characterization, colored-noise synthesis and CAE denoising for optical OOK links."""
from .allan import (
    AvarCurve,
    NoiseCoefficients,
    allan_variance,
    central_decades,
    default_cluster_grid,
    extract_coefficients,
    fit_slope,
)
from .errors import CaptureFormatError, DataError, ModelFormatError, NumericalError, VlcNoiseError
from .kernels import BACKEND
from .signals import (
    ChannelParams,
    OokPattern,
    TimeSeries,
    apply_channel,
    generate_ook,
    load_capture,
    normalize_unit,
    save_capture,
)
from .stattests import LjungBoxResult, autocorrelation, chi2_cdf, chi2_quantile, ljung_box
from .synth import NoiseComponent, NoiseRecipe, colored_noise, gaussian_white, synthesize, wiener_weights

__version__ = "0.1.0"
