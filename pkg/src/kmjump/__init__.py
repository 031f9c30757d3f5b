"""Jump-diffusion reconstruction from time series via Kramers-Moyal coefficients."""

__version__ = "0.1.0"

from .binning import BinGrid, ZoneTargets, adaptive_bins, classical_bin_count, kde  # noqa: E402
from .dist_fit import DistFamily, ParamEstimate, ParamSeries, fit_cross_section, fit_mle, pdf  # noqa: E402
from .errors import (CSVFormatError, DegenerateDataError, DomainError,  # noqa: E402
                     InsufficientDataError, KMJumpError)
from .jumps import (JumpParams, global_infinitesimal_moments, invert_jump_params,  # noqa: E402
                    variance_decomposition)
from .km import (KMResult, MomentTable, correct_moments, infinitesimal_moments,  # noqa: E402
                 km_analysis, km_coefficients, raw_conditional_moments, weighted_errors)
from .markov import (MarkovReport, conditional_entropy, markov_report,  # noqa: E402
                     markov_time_entropy, markov_time_pacf, pacf_yule_walker)
from .preprocess import (IntradayProfile, intraday_profile, moving_average_detrend,  # noqa: E402
                         remove_intraday)
from .series import TimeSeries  # noqa: E402
from .simulate import SimConfig, jump_log, simulate  # noqa: E402
from .stationarity import adf_test, kpss_test, stationarity_report  # noqa: E402
