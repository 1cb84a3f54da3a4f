import pytest

from allconcur.net import (
    NetState,
    SendEntry,
    StepDisabled,
    append_recv,
    bcast,
    deliver_msg,
    fail_notice,
    send_msg,
    tx_msg,
)
from allconcur.overlay import complete_digraph

K3 = complete_digraph(3)
ALL = 0b111


def test_send_to_live_successors():
    net = send_msg(NetState.empty(3), 0, [bcast(0)], ALL, K3)
    assert net.send_buf[0] == (SendEntry(bcast(0), (1, 2)),)


def test_send_skips_owner():
    net = send_msg(NetState.empty(3), 1, [bcast(0)], ALL, K3)
    assert net.send_buf[1] == (SendEntry(bcast(0), (2,)),)


def test_send_without_live_destination_is_dropped():
    net = NetState.empty(3)
    assert send_msg(net, 1, [bcast(0)], 0b011, K3) == net


def test_tx_head_destination():
    net = send_msg(NetState.empty(3), 0, [bcast(0)], ALL, K3)
    net = tx_msg(net, 0)
    assert net.send_buf[0] == (SendEntry(bcast(0), (2,)),)
    assert net.recv_buf[1] == (bcast(0),)
    net = tx_msg(net, 0)
    assert net.send_buf[0] == ()
    assert net.recv_buf[2] == (bcast(0),)


def test_tx_only_touches_head_entry():
    net = send_msg(NetState.empty(3), 0, [bcast(0), fail_notice(0, 1)], ALL, K3)
    net = tx_msg(net, 0, 2)
    assert net.send_buf[0] == (SendEntry(bcast(0), (1,)), SendEntry(fail_notice(0, 1), (1, 2)))
    assert net.recv_buf == ((), (), (bcast(0),))
    with pytest.raises(StepDisabled):
        tx_msg(net, 0, 2)


def test_tx_empty_disabled():
    with pytest.raises(StepDisabled):
        tx_msg(NetState.empty(3), 0)


def test_deliver_fifo():
    net = append_recv(append_recv(NetState.empty(3), 1, bcast(0)), 1, bcast(2))
    net, m = deliver_msg(net, 1)
    assert m == bcast(0) and net.recv_buf[1] == (bcast(2),)
    net, m = deliver_msg(net, 1)
    assert m == bcast(2) and net.recv_buf[1] == ()
    with pytest.raises(StepDisabled):
        deliver_msg(net, 1)


def test_message_json():
    assert bcast(3).to_json() == {"kind": "BCAST", "o": 3}
    assert fail_notice(4, 0).to_json() == {"kind": "FAIL", "o": 4, "t": 0}
