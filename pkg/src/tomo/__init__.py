"""Electrical resistance tomography toolkit.

Simulation of boundary voltage measurements on a triangulated unit
disc, sensitivity-based image reconstruction (back projection,
Landweber iteration, Tikhonov regularization), synthetic phantom
corpora and evaluation metrics. The ``tomo`` command line groups the
same functionality into composable subcommands.
"""

__version__ = "0.1.0"
