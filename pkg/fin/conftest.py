"""
Shared test fixtures
"""
import copy

import pytest

from fin.scenario import scenario_from_dict

# Two compute nodes, two blocks, exit-1 below and exit-2 above the 80 % target.
# Edge weights: src->(m,1) 1 ms / 1 mJ, (m,1)->(m,2) 4 ms / 4 mJ,
# (m,1)->(e,2) 1.4 ms / 2.002 mJ; half the samples leave at exit-1.
TINY = {
    'nodes': [
        {'id': 'src', 'tier': 'source'},
        {'id': 'm', 'tier': 'mobile', 'compute_capacity': '1 GOPS', 'compute_power': '1 W',
         'uplink_capacity': '1 Mbps', 'downlink_capacity': '1 Mbps',
         'tx_energy_per_bit': '1 nJ/bit', 'rx_energy_per_bit': '1 nJ/bit'},
        {'id': 'e', 'tier': 'edge', 'compute_capacity': '10 GOPS', 'compute_power': '5 W',
         'uplink_capacity': '1 Mbps', 'downlink_capacity': '1 Mbps',
         'tx_energy_per_bit': '1 nJ/bit', 'rx_energy_per_bit': '1 nJ/bit'}
    ],
    'links': [
        {'from': 'src', 'to': 'm', 'bandwidth': 'inf'},
        {'from': 'm', 'to': 'e'},
        {'from': 'e', 'to': 'm'}
    ],
    'applications': [
        {
            'id': 'a',
            'source': 'src',
            'rate': 1,
            'target_latency': '10 ms',
            'target_accuracy': '80 %',
            'bits_per_feature': 1,
            'model': {
                'name': 'tiny',
                'blocks': [
                    {'features': 1000, 'ops': '1 MOPs',
                     'exit': {'index': 1, 'ops': 0, 'fraction': '50 %', 'accuracy': '60 %'}},
                    {'features': 10, 'ops': '4 MOPs',
                     'exit': {'index': 2, 'ops': 0, 'fraction': '50 %', 'accuracy': '90 %'}}
                ]
            }
        }
    ]
}


@pytest.fixture(autouse=True)
def testing_env(monkeypatch):
    """Run every test under the testing configuration"""
    monkeypatch.setenv('FIN_ENV', 'testing')


@pytest.fixture
def tiny_raw():
    """Editable copy of the two-node scenario document"""
    return copy.deepcopy(TINY)


@pytest.fixture
def make_tiny(tiny_raw):
    """Build the two-node scenario, optionally overriding application fields or links"""
    def build(links=None, **app_fields):
        raw = copy.deepcopy(tiny_raw)
        raw['applications'][0].update(app_fields)
        if links is not None:
            raw['links'] = links
        return scenario_from_dict(raw, name='tiny')
    return build


@pytest.fixture
def tiny(make_tiny):
    """The two-node scenario as declared"""
    return make_tiny()
