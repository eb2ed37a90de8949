"""The analyst loop in natural language, entirely offline.

Every query is routed through the rule grammar onto the closed task
registry; the engine does all the numbers; guidance text comes from a
fixed template table. Run:  python3 demos/03_query_session.py
"""

from statquery import handle_query, new_session
from statquery.flights import FLIGHT_SYNONYMS
from statquery.session import attach_dataset

session = new_session(synonyms=FLIGHT_SYNONYMS, default_seed=7)
attach_dataset(
    session,
    open("fixtures/flights_skewed.csv").read(),
    source_name="flights_skewed.csv",
)

QUERIES = [
    # describe a relationship -> the system fits a model
    "Longer flight results in a more expensive ticket",
    # the clusters in the scatter turn out to be travel class
    "Include class as an additional variable.",
    # the analyst reads the residual plot and reports what they see
    "The residual patterns don’t look random.",
    # accept the offered refinement (one-slot conversational memory)
    "yes",
    # a hypothesis about slopes differing between groups
    "Does flight duration affect price differently for economy and business class?",
    # something outside the registry is rejected verbatim, never guessed
    "please write a poem about airplanes",
]

for query in QUERIES:
    print(f"\nuser>   {query}")
    entry = handle_query(session, query)
    print(f"system> {entry.text}")
    result = entry.result or {}
    if "model" in result:
        m = result["model"]
        print(f"        {m['formula']} [{m['family']}], AIC {m['aic']:.1f}")
    if "slopes" in result:
        for row in result["slopes"]["rows"]:
            print(
                f"        slope[{row['level']}] = {row['slope']:.3f} "
                f"(se {row['se']:.3f}, p {row['p']:.3g})"
            )
        it = result["slopes"]["interaction"]
        print(f"        interaction {it['kind']}={it['statistic']:.3f}, p={it['p']:.3g}")
    for line in entry.guidance:
        print(f"        >> {line}")

print(f"\nfinal model family: {session.active_model.spec.family}")
print(f"models fit this session: {len(session.model_history)}")
print(f"transcript entries: {len(session.transcript)}")
