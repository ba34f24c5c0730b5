from configparser import ConfigParser
from pathlib import Path
from typing import Optional, cast

PROJECT_ROOT = Path(__file__).parent.parent
CONFIG_FN = PROJECT_ROOT.joinpath("mulnet.ini").__str__()

_CONFIG_KEY = "__mulnet_config"


def out_fn(basename: str) -> Path:
    return PROJECT_ROOT.joinpath("out").joinpath(basename).absolute()


def config(path: Optional[str] = None) -> ConfigParser:
    """
    The ini configuration at `path` (the project's mulnet.ini by default),
    read once per process and path.

    A missing file is not an error: every key has a dataclass default, and the
    returned parser is then simply empty.
    """
    key = f"{_CONFIG_KEY}:{Path(path or CONFIG_FN).absolute()}"
    # this caching is done to ensure that config changes do not take effect
    # until the application is restarted
    if key not in globals():
        cp = ConfigParser()
        cp.read(path or CONFIG_FN)
        globals()[key] = cp
    return cast(ConfigParser, globals()[key])


def reset_config() -> None:
    for key in [k for k in globals() if k.startswith(_CONFIG_KEY)]:
        globals().pop(key)
