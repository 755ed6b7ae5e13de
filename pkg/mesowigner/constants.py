from enum import Enum, IntEnum


class EnsembleKind(str, Enum):
    """Off-diagonal entry laws of the complex Wigner ensembles."""

    GUE = "GUE"
    FOUR_PHASE = "FourPhase"
    COMPLEX_UNIFORM_DISK = "ComplexUniformDisk"


class Experiment(str, Enum):
    COV_V = "CovV"
    VAR_MESO = "VarMeso"
    UNIVERSALITY = "Universality"
    NORMALITY = "Normality"
    LOG_PROCESS = "LogProcess"
    SINE_KERNEL = "SineKernel"
    SEMICIRCLE_KS = "SemicircleKS"
    LOCAL_LAW = "LocalLaw"


class PathOrigin(str, Enum):
    """How a Gaussian path was generated."""

    CAYLEY_SERIES = "CayleySeries"
    CHOLESKY_KERNEL = "CholeskyKernel"
    INTEGRATED_GAMMA = "IntegratedGamma"


class ExitCode(IntEnum):
    OK = 0
    RUNTIME_ERROR = 1
    STATISTICAL_REJECTION = 2


class Regime:
    # Mesoscopic frame labels
    THEOREM = "theorem regime"
    OUTSIDE = "outside proven regime"
    MICROSCOPIC = "microscopic"


# Exponent bound below which the mesoscopic CLT is proven.
THEOREM_GAMMA_BOUND = 1 / 3
