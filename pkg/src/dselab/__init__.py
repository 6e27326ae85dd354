"""dselab: desk-scale power system dynamics laboratory.

Simulates small grids, synthesizes PMU and sampled-value measurement
streams, runs dynamic state estimation over them, and implements the
estimation-fed protection and control functions built on top.
"""

__version__ = "0.1.0"
