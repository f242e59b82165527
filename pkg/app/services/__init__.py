"""Exact computations: lattices, polytopes, fans, hypersurfaces and the atlas."""
