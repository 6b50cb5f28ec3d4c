"""Self-similar blow-up profiles of u_t = -(|u|^n u)_xxxx + |u|^(p-1) u."""

__all__ = ["core", "config", "errors", "odeint", "collocation", "oscillatory", "spectral", "profiles",
           "continuation", "io", "pipeline", "cli"]
__version__ = "0.1.0"
