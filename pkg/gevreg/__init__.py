"""This module contains the gevreg package.

Version: 0.1.0
"""

__version__ = "0.1.0"
