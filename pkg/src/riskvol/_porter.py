"""Porter stemmer, original 1980 rule set (steps 1a through 5b).

Input is assumed to be a lowercase alphabetic token. Within each rule
block the longest matching suffix is selected first; if its condition
fails on the stem, the block changes nothing (no fallback to shorter
suffixes). None of the later "departure" revisions (minimum-length
guard, LOGI rule) are included.
"""

from __future__ import annotations

_VOWELS = frozenset("aeiou")


def _is_consonant(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        # y is a consonant unless preceded by a consonant
        return i == 0 or not _is_consonant(word, i - 1)
    return True


def _measure(stem: str) -> int:
    """Count of vowel-consonant run pairs, the m of [C](VC)^m[V]."""
    m = 0
    prev = None
    for i in range(len(stem)):
        cur = _is_consonant(stem, i)
        if prev is False and cur is True:
            m += 1
        prev = cur
    return m


def _contains_vowel(stem: str) -> bool:
    return any(not _is_consonant(stem, i) for i in range(len(stem)))


def _ends_double_consonant(word: str) -> bool:
    return (
        len(word) >= 2
        and word[-1] == word[-2]
        and _is_consonant(word, len(word) - 1)
    )


def _ends_cvc(stem: str) -> bool:
    """consonant-vowel-consonant ending where the final consonant is not w, x or y."""
    if len(stem) < 3:
        return False
    return (
        _is_consonant(stem, len(stem) - 3)
        and not _is_consonant(stem, len(stem) - 2)
        and _is_consonant(stem, len(stem) - 1)
        and stem[-1] not in "wxy"
    )


def _longest_rule(word, rules):
    """Pick the rule with the longest suffix that string-matches word."""
    best = None
    for rule in rules:
        if word.endswith(rule[0]) and (best is None or len(rule[0]) > len(best[0])):
            best = rule
    return best


def _apply_block(word, rules):
    """Apply one rule block: longest match wins, condition gates the rewrite."""
    rule = _longest_rule(word, rules)
    if rule is None:
        return word
    suffix, replacement, condition = rule
    stem = word[: len(word) - len(suffix)]
    if condition is None or condition(stem):
        return stem + replacement
    return word


_M_GT_0 = lambda stem: _measure(stem) > 0
_M_GT_1 = lambda stem: _measure(stem) > 1

_STEP1A = (
    ("sses", "ss", None),
    ("ies", "i", None),
    ("ss", "ss", None),
    ("s", "", None),
)

_STEP2 = tuple(
    (s, r, _M_GT_0)
    for s, r in (
        ("ational", "ate"),
        ("tional", "tion"),
        ("enci", "ence"),
        ("anci", "ance"),
        ("izer", "ize"),
        ("abli", "able"),
        ("alli", "al"),
        ("entli", "ent"),
        ("eli", "e"),
        ("ousli", "ous"),
        ("ization", "ize"),
        ("ation", "ate"),
        ("ator", "ate"),
        ("alism", "al"),
        ("iveness", "ive"),
        ("fulness", "ful"),
        ("ousness", "ous"),
        ("aliti", "al"),
        ("iviti", "ive"),
        ("biliti", "ble"),
    )
)

_STEP3 = tuple(
    (s, r, _M_GT_0)
    for s, r in (
        ("icate", "ic"),
        ("ative", ""),
        ("alize", "al"),
        ("iciti", "ic"),
        ("ical", "ic"),
        ("ful", ""),
        ("ness", ""),
    )
)

_STEP4 = tuple(
    (s, "", _M_GT_1)
    for s in (
        "al",
        "ance",
        "ence",
        "er",
        "ic",
        "able",
        "ible",
        "ant",
        "ement",
        "ment",
        "ent",
        "ou",
        "ism",
        "ate",
        "iti",
        "ous",
        "ive",
        "ize",
    )
) + (("ion", "", lambda stem: _measure(stem) > 1 and stem[-1:] in ("s", "t")),)


def _step1b(word: str) -> str:
    if word.endswith("eed"):
        stem = word[:-3]
        return stem + "ee" if _measure(stem) > 0 else word
    stripped = False
    if word.endswith("ed"):
        stem = word[:-2]
        if _contains_vowel(stem):
            word, stripped = stem, True
    elif word.endswith("ing"):
        stem = word[:-3]
        if _contains_vowel(stem):
            word, stripped = stem, True
    if stripped:
        if word.endswith(("at", "bl", "iz")):
            return word + "e"
        if _ends_double_consonant(word) and word[-1] not in "lsz":
            return word[:-1]
        if _measure(word) == 1 and _ends_cvc(word):
            return word + "e"
    return word


def _step1c(word: str) -> str:
    if word.endswith("y") and _contains_vowel(word[:-1]):
        return word[:-1] + "i"
    return word


def _step5a(word: str) -> str:
    if word.endswith("e"):
        stem = word[:-1]
        m = _measure(stem)
        if m > 1 or (m == 1 and not _ends_cvc(stem)):
            return stem
    return word


def _step5b(word: str) -> str:
    if word.endswith("l") and _ends_double_consonant(word) and _measure(word) > 1:
        return word[:-1]
    return word


def stem(word: str) -> str:
    """Run a lowercase alphabetic token through all stemming steps."""
    if not word:
        return word
    word = _apply_block(word, _STEP1A)
    word = _step1b(word)
    word = _step1c(word)
    word = _apply_block(word, _STEP2)
    word = _apply_block(word, _STEP3)
    word = _apply_block(word, _STEP4)
    word = _step5a(word)
    word = _step5b(word)
    return word
