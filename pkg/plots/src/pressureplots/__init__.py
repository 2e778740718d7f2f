"""Figure generation for treepressure CSV experiment logs."""

from .cli import PlotSpec, load_convergence_csv, main, plot_convergence

__version__ = "0.1.0"
