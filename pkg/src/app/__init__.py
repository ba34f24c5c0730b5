from .cli import main, mulnet_entrypoint

__all__ = ["main", "mulnet_entrypoint"]
