"""
Services for the hyperbolic Dirichlet solver.

This module exports all service classes.
"""
# Import services here to avoid circular imports
from services.plotting import PlotService
from services.property_suite import PropertySuite
from services.run_service import RunService
