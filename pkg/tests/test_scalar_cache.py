import random

import pytest

from bcsim.scalar_cache import DisjointWriteBuffer, SetAssociativeCache


def test_cold_lookup_misses():
    cache = SetAssociativeCache(4, 4)
    assert cache.find(0, 0x123) is None


def test_install_then_hit():
    cache = SetAssociativeCache(4, 4)
    cache.install(2, 0x123, False, 0)
    line = cache.find(2, 0x123)
    assert line is not None and line.tag == 0x123


def test_lru_victim_is_first_installed():
    cache = SetAssociativeCache(1, 4)
    for tag in (1, 2, 3, 4):
        assert cache.install(0, tag, False, 0) is None
    victim = cache.install(0, 5, False, 0)
    assert victim.tag == 1


def test_touch_changes_victim():
    cache = SetAssociativeCache(1, 4)
    for tag in (1, 2, 3, 4):
        cache.install(0, tag, False, 0)
    cache.touch(cache.find(0, 1))
    victim = cache.install(0, 5, False, 0)
    assert victim.tag == 2


def test_lru_matches_reference_list_oracle():
    rng = random.Random(77)
    cache = SetAssociativeCache(1, 4)
    oracle: list[int] = []  # most recent last
    for _ in range(5000):
        tag = rng.randrange(12)
        line = cache.find(0, tag)
        if line is not None:
            cache.touch(line)
            oracle.remove(tag)
            oracle.append(tag)
        else:
            victim = cache.install(0, tag, False, 0)
            if len(oracle) == 4:
                expect = oracle.pop(0)
                assert victim is not None and victim.tag == expect
            else:
                assert victim is None
            oracle.append(tag)


def test_evict_lru_only_when_full():
    cache = SetAssociativeCache(2, 2)
    assert cache.evict_lru(0) is None
    cache.install(0, 1, True, 3)
    cache.install(0, 2, False, 0)
    victim = cache.evict_lru(0)
    assert victim.tag == 1 and victim.dirty and victim.version == 3
    assert len(cache) == 1


def test_duplicate_install_asserts():
    cache = SetAssociativeCache(1, 2)
    cache.install(0, 9, False, 0)
    with pytest.raises(AssertionError):
        cache.install(0, 9, False, 0)


# -- write buffer ------------------------------------------------------------


def test_wb_fifo_order():
    wb = DisjointWriteBuffer(8)
    for s in (0xA00, 0xB00, 0xC00):
        wb.insert(s, 1)
    assert wb.oldest().sector_base == 0xA00
    wb.remove(0xA00)
    assert wb.oldest().sector_base == 0xB00


def test_wb_capacity_protocol():
    wb = DisjointWriteBuffer(8)
    for i in range(8):
        wb.insert(i * 64, 1)
    with pytest.raises(AssertionError):
        wb.insert(9 * 64, 1)
    wb.remove(0)
    wb.insert(9 * 64, 1)  # fine after a drain made room


def test_wb_oldest_idle_skips_draining():
    wb = DisjointWriteBuffer(8)
    a = wb.insert(0x000, 1)
    b = wb.insert(0x040, 2)
    a.draining = True
    assert wb.oldest_idle() is b
    assert wb.oldest() is a


def test_wb_remove_marks_dead():
    wb = DisjointWriteBuffer(8)
    entry = wb.insert(0x400, 5)
    assert entry.alive
    wb.remove(0x400)
    assert not entry.alive and 0x400 not in wb
