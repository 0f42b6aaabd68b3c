import os
import sys
import random
import logging
from typing import List, Sequence

import pytest

# Add project root to path
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from ingest.ground_truth import GroundTruth  # noqa: E402
from ingest.syslog import LogMessage, Partition  # noqa: E402
from template.core import Template, parse_template  # noqa: E402
from utils.logger import LOGGER_NAME  # noqa: E402


@pytest.fixture(autouse=True)
def fresh_logger():
    # handlers bound to a captured stream must not outlive the test
    yield
    logger = logging.getLogger(LOGGER_NAME)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)


def messages(texts: Sequence[str], app: str = "sshd") -> List[LogMessage]:
    return [LogMessage(index=i, app=app, text=text, raw=text) for i, text in enumerate(texts)]


def truth(*sources: str) -> GroundTruth:
    return GroundTruth(templates=tuple(parse_template(s) for s in sources))


# Two password logins; the authentication method never varies in this log.
PASSWORD_LOGINS = [
    "sshd[4211]: Accepted password for alice from 10.0.0.5 port 50122 ssh2",
    "sshd[4388]: Accepted password for bob from 10.0.0.9 port 50871 ssh2",
]
LOGIN_TRUTH = "sshd[<*>]: Accepted <*> for <*> from <*> port <*> ssh2"
LOGIN_CONSTANT_METHOD = "sshd[<*>]: Accepted password for <*> from <*> port <*> ssh2"
LOGIN_WILDCARD_TAG = "<*> Accepted <*> for <*> from <*> port <*> ssh2"
LOGIN_OVERWILDCARDED = "sshd[<*>]: <*> password <*> from <*> port <*>"

SNMPD_TRUTH = [
    "snmpd[<*>]: Connection from UDP: [<*>]:<*>-><*>",
    "snmpd[<*>]: Received SNMP packet(s) from UDP: [<*>]:<*>-><*>",
    "snmpd[<*>]: NET-SNMP version <*>",
    "snmpd[<*>]: error on subcontainer '<*>' insert (<*>)",
    "snmpd[<*>]: Turning on AgentX master support.",
    "snmpd[<*>]: Received TERM or STOP signal... shutting down...",
    "snmpd[<*>]: /etc/snmp/snmpd.conf: line <*>: Warning: Unknown token: <*>.",
]

SURICATA_TRUTH = "suricata[<*>]: [<*>] <*> [Classification: <*>] [Priority: <*>] {<*>} <*> -> <*>"
SURICATA_FIXED_SIGNATURE = (
    "suricata[<*>]: [1:2100498:7] GPL ATTACK_RESPONSE id check returned root "
    "[Classification: Potentially Bad Traffic] [Priority: 2] {TCP} <*> -> <*>"
)


def synthetic_templates(count: int = 20) -> List[Template]:
    """Templates with pairwise disjoint languages for alphanumeric values."""
    return [parse_template(f"svcd[<*>]: event{n:02d} user <*> from <*>") for n in range(count)]


def instantiate(t: Template, rnd: random.Random) -> str:
    alphabet = "abcdefghijklmnopqrstuvwxyz0123456789"
    parts = []
    for token in t.tokens:
        if token.is_wildcard:
            parts.append("".join(rnd.choice(alphabet) for _ in range(rnd.randint(1, 6))))
        else:
            parts.append(token.text)
    return "".join(parts)


def synthetic_partition(templates: Sequence[Template], size: int, seed: int = 7, used: int = None) -> Partition:
    """Messages drawn from the first `used` templates only, so some truth templates stay uninstantiated."""
    rnd = random.Random(seed)
    pool = list(templates[:used] if used else templates)
    texts = [instantiate(rnd.choice(pool), rnd) for _ in range(size)]
    return Partition(app="svcd", messages=tuple(messages(texts, app="svcd")))


@pytest.fixture
def login_log():
    return messages(PASSWORD_LOGINS)


@pytest.fixture
def snmpd_truth():
    return truth(*SNMPD_TRUTH)


@pytest.fixture
def syslog_corpus():
    return [
        "<34>Oct 11 22:14:15 host1 sshd[12992]: Accepted publickey for john from 10.1.1.1 port 53323 ssh2",
        "Oct 11 22:14:15 host1 su: pam_unix session opened",
        "Oct  3 07:01:02 gw-2 kernel: [12.5] eth0: link up",
        "<13>Feb 28 23:59:59 db01 postgres[771]: checkpoint starting: time",
        "Mar  1 00:00:01 db01 CRON[9001]: (root) CMD (run-parts /etc/cron.hourly)",
        "sshd[17837]: rexec line 29: Deprecated option ServerKeyBits",
        "free text with no tag",
        "Apr 12 10:00:00 web systemd[1]: Started Session 42 of user root.",
    ]
