import io
import logging

import numpy as np
import pytest

from udnsim.logged_object import LoggedObject
from udnsim.util import logs
from udnsim.util.data_logger import DataLogger, read_data_log
from udnsim.util.timeformat import time_delta, kmh_to_mps, tics_in


@pytest.mark.parametrize("seconds, expected", [(0.95, '950ms'), (12.3, '12.3s'), (245, '4:05m'),
                                               (3723, '1:02:03h'), (-2, '-2s'), (119.7, '2:00m'),
                                               (3599.6, '1:00:00h'), (7199.5, '2:00:00h'), (-90.2, '-1:30m')])
def test_time_delta(seconds, expected):
    assert time_delta(seconds) == expected


def test_units():
    assert kmh_to_mps(36.) == pytest.approx(10.)
    assert tics_in(70000, 10) == 7000


@pytest.mark.parametrize("verbosity, level", [('debug', logging.DEBUG), ('5', logging.DEBUG), ('WARN', logging.WARNING),
                                              ('1', logging.CRITICAL), (logging.INFO, logging.INFO)])
def test_verbosity(verbosity, level):
    assert logs.get_verbosity_level(verbosity) == level


def test_unknown_verbosity():
    with pytest.raises(ValueError):
        logs.get_verbosity_level('chatty')


def test_file_logging(tmp_path):
    path = str(tmp_path / 'run.log')
    assert logs.start_file_logging(path, 'info')
    # A second start only changes the level
    assert not logs.start_file_logging(path, 'debug')
    logging.getLogger('test').info("hello %s", 'log')
    assert logs.stop_file_logging(path)
    assert not logs.stop_file_logging(path)
    assert 'hello log' in (tmp_path / 'run.log').read_text()


def test_stdio_logging():
    assert logs.start_stdio_logging('error')
    assert logs.stop_stdio_logging()


def test_data_logger_stream(tmp_path):
    path = tmp_path / 'log.msgpack'
    with open(path, 'wb') as f:
        data_logger = DataLogger(f)
        data_logger.append_data({'tic': 1, 'geo': np.float64(2.5)})
        data_logger.append_data({'tic': 2, 'geo': None})
    assert data_logger.count == 2
    assert read_data_log(str(path)) == [{'tic': 1, 'geo': 2.5}, {'tic': 2, 'geo': None}]


class Named(LoggedObject):
    def __init__(self, name):
        LoggedObject.__init__(self, name)


def test_logged_object_name():
    obj = Named('sweep')
    assert obj.logger.name.endswith('sweep')
    assert Named(None).logger is not None


def test_logged_object_survives_pickling():
    import pickle
    obj = pickle.loads(pickle.dumps(Named('cell')))
    assert obj.logger.name == Named('cell').logger.name


def test_data_logger_writes_to_any_stream():
    buf = io.BytesIO()
    DataLogger(buf).append_data({'a': 1})
    assert buf.getvalue()


def test_restore_logging_in_a_worker(tmp_path):
    path = str(tmp_path / 'worker.log')
    logs.start_file_logging(path, 'info')
    levels = logs.handler_levels()
    assert levels == {path: logging.INFO}
    logs.stop_all_logging()
    logs.restore_logging(levels)
    assert logs.handler_levels() == levels
    # Already attached (as after fork): only the level changes
    logs.restore_logging({path: logging.ERROR})
    assert logs.handler_levels() == {path: logging.ERROR}
