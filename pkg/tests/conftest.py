import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    """Print one visible pass/fail line per acceptance criterion."""
    outcome = yield
    report = outcome.get_result()
    if report.when != "call" or not item.module.__name__.endswith("test_acceptance"):
        return
    criterion = (item.function.__doc__ or item.name).strip().splitlines()[0]
    status = "PASS" if report.passed else "FAIL"
    tw = item.config.get_terminal_writer()
    tw.line("")
    tw.line(f"ACCEPTANCE {status}: {criterion}", green=report.passed, red=not report.passed)

from farmchat.intents import default_registry
from farmchat.rules import default_ruleset


@pytest.fixture(scope="session")
def registry():
    return default_registry()


@pytest.fixture(scope="session")
def ruleset():
    return default_ruleset()


def make_text_event(user_id: str, text: str, event_id: str = "e1", ts: int = 0):
    from farmchat.protocol import EventKind, InboundEvent

    return InboundEvent(event_id=event_id, user_id=user_id, ts=ts, kind=EventKind.TEXT, text=text)


def make_postback(user_id: str, action, event_id: str = "e1", ts: int = 0):
    from farmchat.protocol import EventKind, InboundEvent, MenuAction

    if isinstance(action, str):
        action = MenuAction(action)
    return InboundEvent(
        event_id=event_id, user_id=user_id, ts=ts, kind=EventKind.POSTBACK, action=action
    )
