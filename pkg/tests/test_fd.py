import pytest

from allconcur import fd
from allconcur import protocol as P
from allconcur.net import StepDisabled, fail_notice
from allconcur.overlay import make_circulant
from allconcur.state import Config

G = make_circulant(5, [1, 2])  # 1 and 2 are successors of 0; 3 is not


@pytest.fixture
def failed0():
    return P.fail(P.init(Config(G, 1)), 0)


def test_detect_appends_notice(failed0):
    s = fd.detect_fail(failed0, 1, 0)
    assert s.fd[1] == 1
    assert s.net.recv_buf[1][-1] == fail_notice(1, 0)
    assert fd.accuracy_holds(s)


def test_detect_once(failed0):
    s = fd.detect_fail(failed0, 1, 0)
    with pytest.raises(StepDisabled):
        fd.detect_fail(s, 1, 0)


def test_detect_live_disabled():
    s = P.init(Config(G, 1))
    assert not fd.can_detect(s, 1, 0)
    with pytest.raises(StepDisabled):
        fd.detect_fail(s, 1, 0)


def test_only_successors_detect(failed0):
    assert not fd.can_detect(failed0, 3, 0)
    assert fd.can_detect(failed0, 2, 0)


def test_notice_queued_behind_earlier_messages():
    s = P.init(Config(G, 1))
    s = P.apply(s, P.Action(P.ABCAST, 0))
    s = P.apply(s, P.Action(P.TX, 0, 1))
    s = P.apply(s, P.Action(P.FAIL, 0))
    s = fd.detect_fail(s, 1, 0)
    assert [m.kind.name for m in s.net.recv_buf[1]] == ["BCAST", "FAIL"]
