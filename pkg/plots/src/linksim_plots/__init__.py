"""Figure rendering for linksim CSV output."""

from .render import (SpecError, load_spec, render, render_ab_overlay_figure,
                     render_trajectory_figure)

__version__ = "0.1.0"
