from llm.backends import (
    BackendConfig,
    BackendExchange,
    CompletionBackend,
    HttpBackend,
    OracleBackend,
    ScriptedBackend,
    create_backend,
    load_script,
    query,
    record_exchanges,
)
from llm.extractor import extract_candidates
from llm.prompt import Prompt, build_prompt
