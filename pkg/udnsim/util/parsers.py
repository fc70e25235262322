"""
Conversion of config-file and command-line strings into typed values.

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
import math
from typing import Callable, List, Any

FAIL = object()


def parameter_str(param, default=None):
    try:
        return str(param).strip()
    except (TypeError, ValueError):
        return default


def parameter_int(param, default=None):
    if isinstance(param, bool):
        return default
    if isinstance(param, float):
        return int(param) if param.is_integer() else default
    try:
        return int(str(param).strip())
    except (TypeError, ValueError):
        return default


def parameter_float(param, default=None):
    if isinstance(param, bool):
        return default
    try:
        ret = float(str(param).strip()) if isinstance(param, str) else float(param)
    except (TypeError, ValueError):
        return default
    if math.isnan(ret):
        return default
    return ret


def parameter_bool(param, default=None):
    """ Accepts 0/1 as used by the config grammar, plus the usual true/false spellings. """
    if isinstance(param, bool):
        return param
    if isinstance(param, int):
        return {0: False, 1: True}.get(param, default)
    if isinstance(param, str):
        return {
            '0': False, 'false': False, 'no': False, 'off': False,
            '1': True, 'true': True, 'yes': True, 'on': True,
        }.get(param.strip().lower(), default)
    return default


def parameter_u64(param, default=None):
    ret = parameter_int(param, FAIL)
    if ret is FAIL or not 0 <= ret < 2 ** 64:
        return default
    return ret


def parameter_ttt(param, default=None):
    """ A TTT in tics, or 'inf' for the never-trigger sentinel. """
    if isinstance(param, str) and param.strip().lower() in ('inf', 'never'):
        return math.inf
    if isinstance(param, float) and math.isinf(param):
        return param
    return parameter_int(param, default)


def parameter_list(param, item_func: Callable[[Any, Any], Any] = parameter_float, default=None) -> List:
    """
    Parse a comma separated list (e.g., '10,20,30').
    Ranges in the form 'start:stop:step' (stop inclusive) are expanded.
    """
    if isinstance(param, (list, tuple)):
        items = list(param)
    elif isinstance(param, str):
        items = [p for p in param.replace(' ', '').split(',') if p]
    else:
        return default

    ret = []
    for item in items:
        if isinstance(item, str) and ':' in item:
            parts = [parameter_float(p, FAIL) for p in item.split(':')]
            if len(parts) not in (2, 3) or any(p is FAIL for p in parts):
                return default
            start, stop, step = (*parts, 1.0) if len(parts) == 2 else parts
            if step <= 0:
                return default
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            expanded = [start + i * step for i in range(max(count, 0))]
            items_values = [item_func(v, FAIL) for v in expanded]
        else:
            items_values = [item_func(item, FAIL)]
        if any(v is FAIL for v in items_values):
            return default
        ret.extend(items_values)
    if not ret:
        return default
    return ret
