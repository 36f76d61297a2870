from .kernel import KernelSpec, load_kernel  # noqa:F401
from .measure import MeasureSpec, load_measure  # noqa:F401
from .smallball import SmallBallEstimate  # noqa:F401
from .spectrum import Spectrum  # noqa:F401
from .version import __VERSION__  # noqa:F401
