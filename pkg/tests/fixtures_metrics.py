"""Hand-computed confusion-matrix fixtures: (matrix, accuracy, TPR, FPR, F-measure), all weighted by support."""

from fractions import Fraction as Fr

FIXTURES = [
    # perfect two-class
    ([[2, 0], [0, 2]], Fr(1), Fr(1), Fr(0), Fr(1)),
    # coin flip: each class P = R = 1/2
    ([[1, 1], [1, 1]], Fr(1, 2), Fr(1, 2), Fr(1, 2), Fr(1, 2)),
    # constant predictor: class 0 has P=1/2, R=1, F=2/3, FPR=1; class 1 all zero
    ([[3, 0], [3, 0]], Fr(1, 2), Fr(1, 2), Fr(1, 2), Fr(1, 3)),
    # imbalanced three-class: R=(5/6, 1/2, 1), P=(5/7, 3/4, 4/5), FPR=(2/10, 1/10, 1/12)
    ([[5, 1, 0], [2, 3, 1], [0, 0, 4]], Fr(3, 4), Fr(3, 4),
     (6 * Fr(2, 10) + 6 * Fr(1, 10) + 4 * Fr(1, 12)) / 16,
     (6 * Fr(10, 13) + 6 * Fr(3, 5) + 4 * Fr(8, 9)) / 16),
    # a vocabulary class never seen nor predicted gets weight 0
    ([[3, 1, 0], [1, 3, 0], [0, 0, 0]], Fr(3, 4), Fr(3, 4), Fr(1, 4), Fr(3, 4)),
]
