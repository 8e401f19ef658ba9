#include "bayesedge/quadrature.hpp"

#include <Eigen/Eigenvalues>

namespace bayesedge
{
    namespace
    {
        // Legendre P_n(x) and its derivative by the three-term recurrence.
        std::pair<double, double> legendre(int n, double x)
        {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k)
            {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            const double dp = n * (x * p1 - p0) / (x * x - 1.0);
            return {p1, dp};
        }
    } // namespace

    GaussLegendreRule gauss_legendre(int count, double lo, double hi)
    {
        if (count < 1)
            throw InvalidArgument("Gauss-Legendre rule needs at least one node");
        if (!(hi > lo))
            throw InvalidArgument("Gauss-Legendre interval must satisfy lo < hi");

        Eigen::VectorXd x(count), w(count);
        if (count == 1)
        {
            x(0) = 0.0;
            w(0) = 2.0;
        }
        else
        {
            // Golub-Welsch start, then Newton polish on P_n.
            Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(count, count);
            for (int k = 1; k < count; ++k)
            {
                const double b = k / std::sqrt(4.0 * k * k - 1.0);
                jacobi(k, k - 1) = b;
                jacobi(k - 1, k) = b;
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
            x = solver.eigenvalues();
            for (int i = 0; i < count; ++i)
            {
                for (int it = 0; it < 3; ++it)
                {
                    const auto [p, dp] = legendre(count, x(i));
                    x(i) -= p / dp;
                }
                const auto [p, dp] = legendre(count, x(i));
                w(i) = 2.0 / ((1.0 - x(i) * x(i)) * dp * dp);
            }
        }

        GaussLegendreRule rule;
        const double half = 0.5 * (hi - lo);
        const double centre = 0.5 * (hi + lo);
        rule.nodes = centre + half * x.array();
        rule.weights = half * w;
        return rule;
    }

    GaussLegendreRule composite_gauss_legendre(std::span<const double> breakpoints, int per_panel)
    {
        if (breakpoints.size() < 2)
            throw InvalidArgument("composite rule needs at least two breakpoints");
        const int panels = static_cast<int>(breakpoints.size()) - 1;
        const GaussLegendreRule unit = gauss_legendre(per_panel);
        GaussLegendreRule rule;
        rule.nodes.resize(panels * per_panel);
        rule.weights.resize(panels * per_panel);
        for (int k = 0; k < panels; ++k)
        {
            const double lo = breakpoints[k], hi = breakpoints[k + 1];
            if (!(hi > lo))
                throw InvalidArgument("composite rule breakpoints must increase");
            rule.nodes.segment(k * per_panel, per_panel) = 0.5 * (hi + lo) + 0.5 * (hi - lo) * unit.nodes.array();
            rule.weights.segment(k * per_panel, per_panel) = 0.5 * (hi - lo) * unit.weights;
        }
        return rule;
    }
} // namespace bayesedge
