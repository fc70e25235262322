"""
Per-instance loggers for the simulator's long-lived objects (handover machines,
sweep runners, trace recorders).

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
import logging
from typing import Optional


class LoggedObject:
    """
    Base class that gives each instance a logger named "<class>-<name>",
    or just "<class>" when the instance has no name.
    """

    def __init__(self, name: Optional[str] = None):
        self.entity_name = name
        self.logger = logging.getLogger(self.logger_name)

    @property
    def logger_name(self) -> str:
        cls_name = self.__class__.__name__
        return cls_name if self.entity_name is None else f"{cls_name}-{self.entity_name}"

    def __repr__(self):
        return f"<{self.logger_name}>"

    def __getstate__(self):
        # Instances travel to sweep worker processes
        state = self.__dict__.copy()
        state.pop('logger', None)
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self.logger = logging.getLogger(self.logger_name)
