"""
Layered configuration.

A DictConfig is built from several layers in priority order (later layers
override earlier ones). Sections are kept for compatibility with INI files;
the simulator's flat key=value files live in the 'main' section.

This program is free software: you can redistribute it and/or modify
it under the terms of the GNU General Public License as published by
the Free Software Foundation, either version 3 of the License, or
(at your option) any later version.

This program is distributed in the hope that it will be useful,
but WITHOUT ANY WARRANTY; without even the implied warranty of
MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
GNU General Public License for more details.

You should have received a copy of the GNU General Public License
along with this program.  If not, see <https://www.gnu.org/licenses/>.
"""
import copy
import configparser
from typing import Union, Iterable, Tuple, List, Dict, Any, Mapping

DictConfigType = Union['DictConfig', Mapping, None]

MAIN_SECTION = 'main'


class ConfigError(ValueError):
    """ One or more configuration fields are invalid. """

    def __init__(self, errors: Iterable[Tuple[str, str]]):
        self.errors: List[Tuple[str, str]] = list(errors)
        ValueError.__init__(self, "\n".join(f"{field}: {message}" for field, message in self.errors))

    @classmethod
    def single(cls, field: str, message: str) -> 'ConfigError':
        return cls([(field, message)])

    def __reduce__(self):
        return self.__class__, (self.errors,)


class DictConfig:
    """
    Layered configuration: every layer maps 'key' (main section) or (section, key) to a value,
    and later layers override earlier ones. Values are kept as given; parsing is up to the consumer.
    """

    def __init__(self, *layers: DictConfigType):
        self._sections: Dict[str, Dict[str, Any]] = {}
        for layer in layers:
            if layer is None:
                continue
            if isinstance(layer, DictConfig):
                for section, values in layer._sections.items():
                    self._section(section).update(values)
            elif isinstance(layer, Mapping):
                self.update(layer)
            else:
                raise ValueError(f"A config layer must be a mapping or a DictConfig. Got {layer!r}.")

    def _section(self, section: str) -> Dict[str, Any]:
        return self._sections.setdefault(section, {})

    def update(self, layer: Mapping):
        for key, value in layer.items():
            section, key = key if isinstance(key, tuple) else (MAIN_SECTION, key)
            self._section(section)[key] = copy.copy(value)

    def items(self, section: str = MAIN_SECTION) -> Dict[str, Any]:
        return dict(self._sections.get(section, {}))


def read_flat_config(text: str, source: str = '<string>') -> Dict[str, str]:
    """
    Read flat 'key = value' text ('#' or ';' comments) into a dict of raw strings.
    Duplicate keys and lines without a delimiter are reported as ConfigError.
    """
    parser = configparser.ConfigParser(interpolation=None, delimiters=('=',), comment_prefixes=('#', ';'),
                                       inline_comment_prefixes=('#',), strict=True, empty_lines_in_values=False)
    parser.optionxform = str
    try:
        parser.read_string(f"[{MAIN_SECTION}]\n{text}", source=source)
    except configparser.DuplicateOptionError as e:
        raise ConfigError.single(e.option, f"duplicate key in {source} (line {e.lineno - 1})") from e
    except configparser.ParsingError as e:
        lines = ", ".join(str(lineno - 1) for lineno, _ in e.errors)
        raise ConfigError.single(source, f"expected 'key = value' at line(s) {lines}") from e
    except configparser.Error as e:
        raise ConfigError.single(source, str(e)) from e
    return dict(parser.items(MAIN_SECTION))


def read_flat_config_file(path: str) -> Dict[str, str]:
    with open(path, 'r', encoding='utf-8') as f:
        return read_flat_config(f.read(), source=path)
