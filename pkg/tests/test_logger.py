# tests/test_logger.py
import logging
from logging.handlers import RotatingFileHandler

import pytest

from utils.logger import ROOT_NAME, set_console_level, setup_logger


def console_handlers(logger):
    return [h for h in logger.handlers if type(h) is logging.StreamHandler]


class TestSetupLogger:
    def test_module_loggers_share_the_root_handlers(self):
        first = setup_logger("analysis.bands")
        second = setup_logger("polaron.solver")
        root = setup_logger(ROOT_NAME)
        assert first.name == "jjduality.analysis.bands"
        assert second.name == "jjduality.polaron.solver"
        for logger in (first, second):
            assert logger.handlers == []
            assert logger.propagate
        assert not root.propagate
        assert sum(isinstance(h, RotatingFileHandler) for h in root.handlers) <= 1
        assert len(console_handlers(root)) == 1

    def test_repeated_setup_adds_no_handlers(self):
        root = setup_logger(ROOT_NAME)
        before = list(root.handlers)
        for _ in range(3):
            setup_logger("results.cache")
            setup_logger(ROOT_NAME)
        assert root.handlers == before

    def test_prefixed_name_is_kept(self):
        assert setup_logger("jjduality.oracle.bare").name == "jjduality.oracle.bare"

    def test_module_records_reach_the_root(self, caplog):
        root = setup_logger(ROOT_NAME)
        root.addHandler(caplog.handler)
        try:
            setup_logger("commands.run").warning("band sweep finished")
        finally:
            root.removeHandler(caplog.handler)
        assert [r.name for r in caplog.records] == ["jjduality.commands.run"]


class TestConsoleLevel:
    @pytest.fixture
    def console(self):
        handler, = console_handlers(setup_logger(ROOT_NAME))
        level = handler.level
        yield handler
        handler.setLevel(level)

    def test_console_level_changes_only_the_console(self, console):
        root = setup_logger(ROOT_NAME)
        files = [(h, h.level) for h in root.handlers if isinstance(h, RotatingFileHandler)]
        set_console_level(logging.DEBUG)
        assert console.level == logging.DEBUG
        set_console_level(logging.WARNING)
        assert console.level == logging.WARNING
        assert all(h.level == level for h, level in files)
