"""Published results, used only for side-by-side display next to our own numbers.

Keys are ``(dataset, feature, scheme, protocol)``; values are
``(accuracy %, TPR, FPR, F-measure, AUC)``. These are not targets: the
original datasets are licence-gated and several training parameters
were never published.
"""

from __future__ import annotations

from typing import Optional

from .au_mapping import canonical_dataset_name

_COLUMNS = ("accuracy", "tpr", "fpr", "f_measure", "auc")

# feature -> scheme -> (kfold row, loso row)
_CASME_II = {
    "lbp-top": {
        "original": ((77.17, .56, .22, .53, .74), (68.24, .49, .17, .48, .63)),
        "I-V": ((77.94, .63, .33, .58, .70), (67.80, .54, .14, .51, .44)),
        "I-VI": ((76.84, .59, .32, .55, .69), (67.94, .53, .14, .51, .44)),
        "I-VII": ((76.13, .50, .23, .45, .70), (61.92, .39, .17, .35, .63)),
    },
    "hoof": {
        "original": ((78.83, .61, .19, .60, .78), (68.36, .51, .24, .49, .61)),
        "I-V": ((82.70, .69, .22, .67, .80), (69.64, .59, .18, .56, .47)),
        "I-VI": ((82.41, .68, .23, .66, .79), (73.52, .62, .18, .60, .47)),
        "I-VII": ((83.94, .64, .14, .63, .79), (76.60, .57, .14, .55, .72)),
    },
    "hog3d": {
        "original": ((80.93, .62, .14, .62, .79), (59.59, .38, .24, .35, .50)),
        "I-V": ((86.35, .72, .13, .72, .84), (69.53, .56, .18, .51, .40)),
        "I-VI": ((83.49, .68, .16, .67, .80), (69.87, .56, .18, .51, .40)),
        "I-VII": ((82.59, .58, .12, .58, .79), (61.33, .39, .30, .31, .51)),
    },
}

_SAMM = {
    "lbp-top": {
        "I-V": ((79.21, .54, .16, .51, .74), (44.70, .38, .19, .35, .31)),
        "I-VI": ((81.93, .55, .13, .52, .74), (45.89, .34, .17, .31, .36)),
        "I-VII": ((79.52, .57, .18, .56, .74), (54.93, .42, .22, .39, .40)),
    },
    "hoof": {
        "I-V": ((78.95, .56, .16, .55, .74), (42.17, .32, .06, .33, .32)),
        "I-VI": ((79.53, .52, .15, .51, .73), (40.89, .28, .07, .27, .35)),
        "I-VII": ((72.80, .52, .32, .50, .65), (60.06, .49, .25, .48, .30)),
    },
    "hog3d": {
        "I-V": ((77.18, .51, .17, .49, .74), (34.16, .22, .15, .22, .24)),
        "I-VI": ((79.41, .48, .15, .45, .71), (36.39, .19, .14, .19, .26)),
        "I-VII": ((79.09, .59, .25, .55, .71), (63.93, .50, .22, .44, .30)),
    },
}

PUBLISHED: dict[tuple[str, str, str, str], dict[str, float]] = {}
for _dataset, _table in (("CASME II", _CASME_II), ("SAMM", _SAMM)):
    for _feature, _rows in _table.items():
        for _scheme, (_kfold, _loso) in _rows.items():
            PUBLISHED[(_dataset, _feature, _scheme, "kfold")] = dict(zip(_COLUMNS, _kfold))
            PUBLISHED[(_dataset, _feature, _scheme, "loso")] = dict(zip(_COLUMNS, _loso))


def published_result(dataset: str, feature: str, scheme: str, protocol: str) -> Optional[dict[str, float]]:
    canonical = canonical_dataset_name(dataset)
    if canonical is None:
        return None
    return PUBLISHED.get((canonical, feature, scheme, protocol))
