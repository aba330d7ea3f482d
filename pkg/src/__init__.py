"""
Seamless-L0 penalized quantile regression
"""
__version__ = "0.3.0"
