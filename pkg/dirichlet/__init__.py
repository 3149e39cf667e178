"""
The discretized Dirichlet problem u G[u] = sigma, u = epsilon on the boundary.

Submodules:
    grid      level-set domains, stencils and derived states
    solver    monotone outer iteration, continuity method, epsilon ladder
    barriers  barrier surfaces and a priori estimate diagnostics
    oracle    radial shooting solutions for disks and annuli
"""
