import logging

import pytest

from boosted_cascade.logging import resolve_level, setup_logging


def test_resolve_level():
    assert resolve_level('info') == logging.INFO
    assert resolve_level('WARNING') == logging.WARNING
    with pytest.raises(ValueError):
        resolve_level('chatty')

def test_setup_logging_quiets_third_party_loggers():
    setup_logging('INFO')
    assert logging.getLogger().level == logging.INFO
    assert logging.getLogger('libcloud').level == logging.WARNING
    setup_logging('DEBUG')
    assert logging.getLogger('libcloud').level == logging.DEBUG
    with pytest.raises(ValueError):
        setup_logging('chatty')
