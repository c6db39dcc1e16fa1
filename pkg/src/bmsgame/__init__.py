"""Exact-arithmetic engine for Schmidt-type games on R^d.

Plays and verifies the Schmidt, absolute, Banach-Mazur, Banach-Mazur-Schmidt
(BMS) and Banach-Mazur-McMullen (BMM) games with rational data, and ships the
constructive strategies and Diophantine estimators needed to judge them.
"""

__version__ = "0.1.0"
