from template.core import (
    WILDCARD,
    MatchSet,
    Template,
    Token,
    TokenKind,
    format_template,
    match_set,
    matches,
    parse_template,
    template_from_tokens,
)
from template.relations import (
    is_constant_specialization,
    is_word_atomic_generalization,
    language_subset,
    strict_subset,
)
