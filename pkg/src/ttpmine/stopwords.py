"""Embedded English stopword list.

Fixed and versioned in the repo so tokenization never depends on an
external resource. The list deliberately leaves out every temporal
marker, the conditional connectives (if/otherwise/unless/else) and the
pronouns/demonstratives (it, they, this, that, which, these, those):
downstream marker counting, discourse classification and coreference
rules match on those tokens, so dropping them here would make the rules
unreachable.
"""

STOPWORDS_VERSION = "1"

STOPWORDS: frozenset[str] = frozenset(
    """
    a an the all any both each every few more most much other some such own same
    and or but nor so yet because since although though whereas
    of in on at to from by with without into onto over under above below up down
    out off about against between among across along around behind beside beyond
    near toward towards upon via per
    i you he she we me him her us them my your his its our their mine yours hers
    ours theirs who whom whose what
    when where why how there here also too very just only than as however
    therefore thus hence again
    is are was were be been being am do does did done have has had having will
    would shall should can could may might must not no
    """.split()
)
