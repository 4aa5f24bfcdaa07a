import datetime

import pytest

from ttcs import daa, ledger as ledger_mod, scheme

TODAY = datetime.date(2026, 8, 9)


@pytest.fixture(scope="session")
def params():
    return scheme.setup(128)


@pytest.fixture(scope="session")
def issuer_keys(params):
    return scheme.keygen(params, epoch="e1")


@pytest.fixture(scope="session")
def pk_i(issuer_keys):
    return issuer_keys[0]


@pytest.fixture(scope="session")
def isk(issuer_keys):
    return issuer_keys[1]


@pytest.fixture(scope="session")
def member(pk_i, isk):
    """A joined member under the session issuer key: (sk, credential)."""
    sk = 0xDEADBEEF12345678
    cred = daa.issue(isk, daa.join(pk_i, sk, b"fixture-nonce"))
    return sk, cred


@pytest.fixture()
def fresh_ledger():
    return ledger_mod.Ledger(clock=lambda: TODAY)
