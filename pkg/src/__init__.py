"""
els: axisymmetric Poiseuille flow of the hyperbolic Ericksen-Leslie system
"""
