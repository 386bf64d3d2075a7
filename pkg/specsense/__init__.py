"""Multi-antenna spectrum sensing with John's locally best invariant test.

Detectors, exact H0 moment theory, a two-moment generalized Beta
approximation for false alarm probability and thresholds, and a Monte Carlo
harness for accuracy and ROC studies.
"""

from specsense.__version__ import __version__

__author__ = "specsense developers"
__all__ = ["__version__"]
