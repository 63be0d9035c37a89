import io

import pytest

from mvqa.tools import logger


@pytest.fixture
def captured_log():
    """
    Routes every usual category to a buffer for the duration of a test.
    """
    buffer = io.StringIO()
    previous = logger.get_logger()
    logger.set_logger(logger.Logger({
        c: buffer for c in ('debug', 'info', 'progress', 'warning', 'error',
                            'internal-error')
    }))
    yield buffer
    logger.set_logger(previous)
