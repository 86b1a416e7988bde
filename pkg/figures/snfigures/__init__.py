"""Post-processing figures for snlab simulation runs.

Rendering never recomputes physics: every number on a figure is read from
the run artifacts (metadata.txt, timeseries.csv, summary.txt), and each
figure asserts the qualitative inequality it displays, so a plot doubles
as a check.
"""

__version__ = "0.1.0"
