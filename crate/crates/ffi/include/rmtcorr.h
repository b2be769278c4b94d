#ifndef RMTCORR_H
#define RMTCORR_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum RmtStatus {
  RMT_STATUS_OK = 0,
  RMT_STATUS_NULL_POINTER = 1,
  RMT_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Malformed or inconsistent input data.
   */
  RMT_STATUS_INPUT_ERROR = 3,
  /**
   * Zero variance or eigensolver failure.
   */
  RMT_STATUS_NUMERICAL_ERROR = 4,
  /**
   * Destination buffer shorter than required.
   */
  RMT_STATUS_BUFFER_TOO_SMALL = 5,
  RMT_STATUS_PANIC = 6,
} RmtStatus;

typedef enum RmtMethod {
  RMT_METHOD_PEARSON = 0,
  RMT_METHOD_SPEARMAN = 1,
} RmtMethod;

typedef struct RmtCorrelation RmtCorrelation;

typedef struct RmtPanel RmtPanel;

typedef struct RmtSpectrum RmtSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null if none failed.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *rmt_last_error(void);

enum RmtStatus rmt_mp_bounds(double q, double sigma, double *lambda_minus, double *lambda_plus);

enum RmtStatus rmt_mp_density(double q, double sigma, double lambda, double *out);

/**
 * One-factor panel with equal pairwise correlation `rho`.
 */
enum RmtStatus rmt_panel_synth(size_t n,
                               size_t rows,
                               double rho,
                               uint64_t seed,
                               struct RmtPanel **out);

/**
 * Reads a `date,SYM1,SYM2,...` returns table.
 */
enum RmtStatus rmt_panel_read_csv(const char *path, struct RmtPanel **out);

/**
 * Wraps a row-major `rows x cols` block. Dates and symbols are synthetic.
 */
enum RmtStatus rmt_panel_from_values(const double *values,
                                     size_t rows,
                                     size_t cols,
                                     struct RmtPanel **out);

enum RmtStatus rmt_panel_shape(const struct RmtPanel *panel, size_t *rows, size_t *cols);

void rmt_panel_free(struct RmtPanel *panel);

enum RmtStatus rmt_correlation(const struct RmtPanel *panel,
                               enum RmtMethod method,
                               struct RmtCorrelation **out);

enum RmtStatus rmt_correlation_size(const struct RmtCorrelation *corr, size_t *n);

/**
 * Copies the `n x n` matrix row-major into `buf`.
 */
enum RmtStatus rmt_correlation_copy(const struct RmtCorrelation *corr, double *buf, size_t len);

/**
 * Ratio `Q = L / N` of the rows the matrix was estimated on to its size.
 */
enum RmtStatus rmt_correlation_ratio(const struct RmtCorrelation *corr, double *q);

void rmt_correlation_free(struct RmtCorrelation *corr);

enum RmtStatus rmt_spectrum(const struct RmtCorrelation *corr, struct RmtSpectrum **out);

enum RmtStatus rmt_spectrum_size(const struct RmtSpectrum *spec, size_t *n);

/**
 * Eigenvalues in ascending order.
 */
enum RmtStatus rmt_spectrum_eigenvalues(const struct RmtSpectrum *spec, double *buf, size_t len);

/**
 * Unit eigenvector of the `k`-th smallest eigenvalue.
 */
enum RmtStatus rmt_spectrum_eigenvector(const struct RmtSpectrum *spec,
                                        size_t k,
                                        double *buf,
                                        size_t len);

enum RmtStatus rmt_spectrum_explained_fraction(const struct RmtSpectrum *spec, double *out);

void rmt_spectrum_free(struct RmtSpectrum *spec);

/**
 * Jarque-Bera statistic and its 5% decision.
 */
enum RmtStatus rmt_jarque_bera(const double *data, size_t n, double *statistic, bool *reject);

/**
 * Lilliefors statistic with its Monte Carlo 5% critical value. The first
 * call for a given `n` runs the calibration.
 */
enum RmtStatus rmt_lilliefors(const double *data,
                              size_t n,
                              double *statistic,
                              double *critical,
                              bool *reject);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RMTCORR_H */
