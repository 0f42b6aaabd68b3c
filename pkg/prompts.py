import logging
from typing import Optional

logger = logging.getLogger("TemplateMiner")


class Prompts:
    """Keeps every prompt text the miner sends in one place."""

    # Static part: task statement, a small multi-application example log and its answer.
    TEMPLATE_DETECTION = """You are an expert in analyzing event logs. Your task is to find templates \
(line patterns) for the log messages you are given. A template keeps the constant parts of the \
messages as they are and replaces every variable part (process IDs, user names, IP addresses, \
port numbers, file names, counters and so on) with the wildcard <*>. Several templates may be \
needed for one log, and one template must describe all messages that differ only in their \
variable parts. Report each template on its own line as a numbered list and do not add anything \
else to the templates.

Example log:
sshd[12992]: Accepted publickey for john from 10.1.1.1 port 53323 ssh2
sshd[17837]: rexec line 29: Deprecated option ServerKeyBits
sshd[20311]: Accepted publickey for alice from 192.168.7.15 port 40112 ssh2
sshd[17837]: rexec line 31: Deprecated option RSAAuthentication
sshd[20500]: Connection closed by 10.5.5.7 port 22219 [preauth]
sshd[20733]: Connection closed by 172.16.0.9 port 51002 [preauth]

Templates for the example log:
1. sshd[<*>]: Accepted publickey for <*> from <*> port <*> ssh2
2. sshd[<*>]: rexec line <*>: Deprecated option <*>
3. sshd[<*>]: Connection closed by <*> port <*> [preauth]

Find the templates for the following log:"""

    BATCH_SEPARATOR = "\n\n"

    @classmethod
    def load_static_part(cls, path: Optional[str] = None) -> str:
        """Return the static prompt part, read from `path` when one is given."""
        if not path:
            return cls.TEMPLATE_DETECTION
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read().rstrip("\n")
        logger.info(f"Using static prompt from {path}")
        return text
