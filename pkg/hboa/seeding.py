"""
Зерна и генераторы: numpy PCG64 через SeedSequence. Экземпляр воспроизводится по зерну
только этим генератором; переносимая запись экземпляра - его файл (см. instance_io)
"""

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    """Генератор PCG64 - единый алгоритм для экземпляров и запусков"""
    return np.random.Generator(np.random.PCG64(seed))


def derive_seed(*keys: int) -> int:
    """Независимое воспроизводимое зерно из набора ключей (базовое зерно, N, номер запуска...)"""
    state = np.random.SeedSequence([int(key) for key in keys]).generate_state(
        2, dtype=np.uint32
    )
    # 63 бита: зерно помещается в int64 колонки CSV
    return int(state[0]) << 31 | int(state[1]) >> 1
