"""pimring - RNS/NTT polynomial-ring arithmetic and a UPMEM PIM cost-model simulator."""

__version__ = "0.1.0"
__author__ = "pimring contributors"
