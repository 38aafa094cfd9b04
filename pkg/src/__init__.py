"""ETF tail-risk monitor - Main package."""

__version__ = "0.1.0"
__author__ = "v1ktorrr0x"
__description__ = "Reliability-aware daily ETF tail-risk monitoring with safe VaR fallback"
