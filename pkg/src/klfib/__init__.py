"""Numerical toolkit for the adiabatic limit of co-associative Kovalev-Lefschetz fibrations.

Subpackages cover: exact exterior algebra and positive 3-forms on 7-space
(:mod:`klfib.exterior`), pointwise hypersymplectic/hyperkahler algebra on
4-space (:mod:`klfib.hyper`), the K3 lattice II(3,19) (:mod:`klfib.lattice`),
discrete positive sections and their mean curvature (:mod:`klfib.sections`),
mean curvature flow (:mod:`klfib.flow`), the Monge-Ampere / torus-G2 /
Weierstrass verification bridges (:mod:`klfib.bridges`), gradient matching
paths (:mod:`klfib.paths`), and curvature verifiers (:mod:`klfib.curvature`).
"""

__version__ = "0.1.0"
