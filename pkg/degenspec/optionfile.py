from configparser import Error as ConfigError
from configparser import RawConfigParser
from pathlib import Path
from typing import Dict, Union

from degenspec.errors import SpecError

RUN_SECTION = "run"


class Parser(RawConfigParser):
    def __init__(self, **kwargs):
        kwargs["allow_no_value"] = True
        super(Parser, self).__init__(**kwargs)

    def get(self, section, option, **kwargs):
        value = super(Parser, self).get(section, option, **kwargs)
        if value is None:
            return value
        quotes = ["'", '"']
        for quote in quotes:
            if len(value) >= 2 and value[0] == value[-1] == quote:
                return value[1:-1]
        return value


def read_run_options(path: Union[str, Path]) -> Dict[str, str]:
    """
    The `[run]` section of an option file, dashes in keys read as underscores.
    """
    parser = Parser()
    try:
        with Path(path).open(encoding="utf-8") as f:
            parser.read_file(f)
    except (OSError, ConfigError) as e:
        raise SpecError(f"cannot read option file {path}: {e}") from e
    if not parser.has_section(RUN_SECTION):
        raise SpecError(f"option file {path} has no [{RUN_SECTION}] section")
    return {
        option.replace("-", "_"): parser.get(RUN_SECTION, option)
        for option in parser.options(RUN_SECTION)
    }
