import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import pytest

from fsqkd import ChannelConditions, ProtocolParams, SecurityParams


@pytest.fixture
def reference_channel() -> ChannelConditions:
    """Mid-loss night-time link, short window (keeps everything fast)."""
    return ChannelConditions(eta_loss_db=30.0, p_ec=1e-6, qber_i=0.01,
                             integration_time_s=60.0)


@pytest.fixture
def reference_params() -> ProtocolParams:
    return ProtocolParams(pax=0.5, pbx=0.5, mu=(0.5, 0.1, 1e-9),
                          p_mu=(1 / 3, 1 / 3, 1 / 3))


@pytest.fixture
def security() -> SecurityParams:
    return SecurityParams()
