"""L^p-polar bodies, L^p-Mahler volumes and isotropic constants of planar polygons."""
__version__ = "0.1.0"
