import threading

import pytest

from cspstack import (
    BufferPool,
    Config,
    CspId,
    CspPacket,
    Delivered,
    DeliveredToPort,
    DroppedNotLocal,
    DroppedUnbound,
    Empty,
    GlobalQueue,
    LengthExceedsBuffer,
    PacketBuf,
    PortInUse,
    QueueFull,
    RxEngine,
    SocketTable,
    Stats,
    csp_send,
    fragment,
    route_once,
)

from conftest import pattern

CFG = Config()


def make_packet(pool, dst=1, dport=7, payload=b"pkt"):
    handle = pool.acquire()
    pool.storage(handle)[: len(payload)] = payload
    pid = CspId(0, 2, dst, dport, 9, 0)
    return PacketBuf(pool, handle, pid, len(payload))


def test_queue_capacity_enforced():
    pool = BufferPool(20, 64)
    stats = Stats()
    q = GlobalQueue(16)
    packets = [make_packet(pool) for _ in range(17)]
    for packet in packets[:16]:
        q.write(packet, "can0", stats)
    with pytest.raises(QueueFull):
        q.write(packets[16], "can0", stats)
    assert stats.snapshot()["q_overflow"] == 1
    # Rejected writer keeps ownership and releases.
    packets[16].release()
    assert q.depth() == 16
    assert pool.in_use() == 16


def test_queue_is_fifo():
    pool = BufferPool(4, 64)
    q = GlobalQueue(4)
    sent = [make_packet(pool, payload=bytes([i])) for i in range(3)]
    for packet in sent:
        q.write(packet, "can0")
    popped = [q.pop()[0].data() for _ in range(3)]
    assert popped == [bytes([0]), bytes([1]), bytes([2])]
    assert q.pop() is None
    for packet in sent:
        packet.release()


def test_route_empty_queue():
    q = GlobalQueue(4)
    assert route_once(q, SocketTable(CFG), CFG) == Empty()


def test_route_delivers_to_bound_port():
    pool = BufferPool(2, 64)
    q = GlobalQueue(4)
    table = SocketTable(CFG)
    sock = table.bind(7)
    q.write(make_packet(pool, dst=CFG.local_address, dport=7), "can0")
    assert route_once(q, table, CFG) == DeliveredToPort(7)
    received = sock.recv()
    assert received.data() == b"pkt"
    received.release()
    assert pool.in_use() == 0
    assert sock.recv() is None


def test_route_drops_foreign_destination():
    pool = BufferPool(2, 64)
    stats = Stats()
    q = GlobalQueue(4)
    q.write(make_packet(pool, dst=(CFG.local_address + 1) % 32, dport=7), "can0")
    assert route_once(q, SocketTable(CFG), CFG, stats) == DroppedNotLocal()
    assert pool.in_use() == 0
    assert stats.snapshot()["not_local"] == 1


def test_route_drops_unbound_port():
    pool = BufferPool(2, 64)
    stats = Stats()
    q = GlobalQueue(4)
    q.write(make_packet(pool, dst=CFG.local_address, dport=9), "can0")
    assert route_once(q, SocketTable(CFG), CFG, stats) == DroppedUnbound()
    assert pool.in_use() == 0
    assert stats.snapshot()["port_unbound"] == 1


def test_socket_overflow_drops_newest():
    cfg = Config(queue_depth=2, pool_capacity=4)
    pool = BufferPool(4, 64)
    stats = Stats()
    q = GlobalQueue(4)
    table = SocketTable(cfg)
    sock = table.bind(7)
    for i in range(3):
        q.write(make_packet(pool, dst=cfg.local_address, dport=7, payload=bytes([i])), "can0")
    assert route_once(q, table, cfg, stats) == DeliveredToPort(7)
    assert route_once(q, table, cfg, stats) == DeliveredToPort(7)
    assert route_once(q, table, cfg, stats) == DroppedUnbound()
    assert stats.snapshot()["port_unbound"] == 1
    # The two oldest packets survive in order.
    first, second = sock.recv(), sock.recv()
    assert (first.data(), second.data()) == (bytes([0]), bytes([1]))
    first.release()
    second.release()
    assert pool.in_use() == 0


def test_bind_conflicts_and_range():
    table = SocketTable(CFG)
    table.bind(7)
    with pytest.raises(PortInUse):
        table.bind(7)
    with pytest.raises(ValueError):
        table.bind(64)
    with pytest.raises(ValueError):
        table.bind(-1)
    table.bind(63)


def test_full_stack_round_trip():
    cfg = Config()
    pool = BufferPool(cfg.pool_capacity, cfg.max_data_len)
    stats = Stats()
    engine = RxEngine(pool, cfg, stats)
    q = GlobalQueue(cfg.queue_depth)
    table = SocketTable(cfg)
    sock = table.bind(21)

    data = pattern(120)
    pid = CspId(1, 4, cfg.local_address, 21, 30, 0)
    for i, frame in enumerate(fragment(CspPacket(pid, data), 5, cfg.max_data_len)):
        outcome = engine.can_rx(frame, i)
        if isinstance(outcome, Delivered):
            q.write(outcome.packet, "can0", stats)
    assert route_once(q, table, cfg, stats) == DeliveredToPort(21)
    received = sock.recv()
    assert received.id == pid
    assert received.data() == data
    received.release()
    assert pool.in_use() == 0
    assert route_once(q, table, cfg, stats) == Empty()


def test_csp_send_emits_fragments_in_order():
    sent = []
    packet = CspPacket(CspId(1, 2, 3, 4, 5, 0), pattern(256))
    count = csp_send(packet, sent.append, 9, CFG)
    assert count == 33 == len(sent)
    assert sent == fragment(packet, 9, CFG.max_data_len)


def test_csp_send_zero_length():
    sent = []
    assert csp_send(CspPacket(CspId(0, 0, 0, 0, 0, 0), b""), sent.append, 0, CFG) == 1
    assert len(sent) == 1


def test_csp_send_invalid_length_emits_nothing():
    sent = []
    with pytest.raises(LengthExceedsBuffer):
        csp_send(CspPacket(CspId(0, 0, 0, 0, 0, 0), bytes(300)), sent.append, 0, CFG)
    assert sent == []


def test_concurrent_producers_preserve_per_producer_order():
    pool = BufferPool(40, 64)
    q = GlobalQueue(40)
    barrier = threading.Barrier(4)

    def producer(tag):
        barrier.wait()
        for seq in range(10):
            q.write(make_packet(pool, payload=bytes([tag, seq])), f"if{tag}")

    threads = [threading.Thread(target=producer, args=(t,)) for t in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    seen = {t: [] for t in range(4)}
    while (entry := q.pop()) is not None:
        packet, _ = entry
        tag, seq = packet.data()
        seen[tag].append(seq)
        packet.release()
    assert all(seen[t] == list(range(10)) for t in range(4))
    assert pool.in_use() == 0
