"""Figure regeneration for ioncavity grid outputs: heatmaps with contour
overlays, driven by JSON recipes. Consumes only the documented CSV/JSON grid
schema; performs no physics computation."""

from .gridio import Grid, read_grid
from .recipes import FigureRecipe, load_recipe
from .contours import extract_contours
from .render import render

__version__ = "0.1.0"
