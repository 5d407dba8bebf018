"""Cleaning a raw press release and cutting it into sentences.

Raw releases carry boilerplate (contact lines, reference numbers, page
numbers, hyphenated line breaks). The default rule set strips it; the
segmenter then splits on sentence punctuation without breaking on
abbreviations such as "Mr." or decimals such as "2.50".
"""
from cbsent.corpus import CleaningRule, CleaningRuleSet, clean_text, default_rules, segment_sentences

raw = """No. 12/2023
The Committee met today. Mr. Piti said the Committee voted to hold the policy rate at 2.50 percent.
Headline inflation is projected to average 2.6 percent in B.E. 2566. The econ-
omy should expand, supported by tourism.\x0c2
Bank of Thailand 27 September 2023 Monetary Policy Strategy Division
Tel: +66 2283 5639 E-mail: MPSD@bot.or.th
"""

print(f"{len(default_rules())} default cleaning rules")
cleaned = clean_text(raw)
# Honorific plus one name token is dropped, so "Mr. Piti said" leaves a
# lowercase "said" that the segmenter does not treat as a sentence start.
print(cleaned)

# Rules are plain data: add one for a house-specific footer.
extra = CleaningRuleSet(default_rules().rules[:-2] + [CleaningRule(r"\bsaid\b", "stated")]
                        + default_rules().rules[-2:])
print(clean_text(raw, extra))

for i, sentence in enumerate(segment_sentences(cleaned), 1):
    print(i, sentence)
