"""Static-figure rendering for mixbgk output bundles."""

from .figures import plot_profiles, plot_scaling

__version__ = "0.1.0"
