"""Generated by scripts/derive_catalog.py; do not edit by hand."""

FROZEN = {'fivedisk_generic': {'centers': [[0.0, 0.0],
                                  [0.3648475939826654, 0.20472082612693482],
                                  [0.7665084730182945, 0.3546032133410893],
                                  [0.14770981128868507, 0.5887216658490457],
                                  [0.5877955078885669, 0.7916861242335292]],
                      'container': 'torus',
                      'lattice': [1.0, 0.0, 1.0],
                      'provenance': 'jam(seed_random(n=5, ratios=(1.0, 1.02, 1.05, 1.11, 1.23), '
                                    'lattice=(1.0, 0.0, 1.0), seed=42)), Gauss-Newton polish',
                      'radii': [0.20710849311427204,
                                0.21125066297655753,
                                0.21746391776998578,
                                0.22989042735684212,
                                0.25474344653055486]},
 'n3': {'centers': [[0.0, 0.0],
                    [0.6339745962155613, 0.36602540378443865],
                    [0.5, 0.8660254037844386]],
        'container': 'torus',
        'lattice': [1.0, 0.0, 1.0],
        'provenance': 'jam(seed_random(n=3, ratios=None, lattice=(1.0, 0.0, 1.0), seed=0)), '
                      'Gauss-Newton polish',
        'radii': [0.25881904510251813, 0.25881904510251813, 0.25881904510251813]},
 'rattler7': {'centers': [[0.0, 0.0],
                          [0.5, 0.5],
                          [0.1830127018922193, 0.3169872981077807],
                          [0.8169872981077807, 0.6830127018922193],
                          [0.8169872981077807, 0.3169872981077807],
                          [0.565168402579889, 0.05135251109622574],
                          [0.18301270189221933, 0.6830127018922193]],
              'container': 'torus',
              'lattice': [1.0, 0.0, 1.0],
              'provenance': 'jam(seed_random(n=7, ratios=None, lattice=(1.0, 0.0, 1.0), seed=6)), '
                            'Gauss-Newton polish',
              'radii': [0.1830127018922175,
                        0.1830127018922175,
                        0.1830127018922175,
                        0.1830127018922175,
                        0.1830127018922175,
                        0.1830127018922175,
                        0.1830127018922175]}}
