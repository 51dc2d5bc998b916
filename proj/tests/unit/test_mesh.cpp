#include "vmsfem/mesh.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace vmsfem;

TEST(GridMesh, SmallestGrid) {
  GridMesh m(1, 1, Rect{0, 0, 1, 1});
  EXPECT_EQ(m.node_count(), 4);
  EXPECT_EQ(m.element_count(), 1);
  EXPECT_DOUBLE_EQ(m.hx(), 1.0);
  EXPECT_DOUBLE_EQ(m.hy(), 1.0);
}

TEST(GridMesh, Counting) {
  GridMesh m(2, 3, Rect{0, 0, 1, 1});
  EXPECT_EQ(m.node_count(), 12);
  EXPECT_EQ(m.element_count(), 6);
  GridMesh big(355, 355, Rect{0, 0, 10, 10});
  EXPECT_EQ(big.element_count(), 126025);
  EXPECT_EQ(big.node_count(), 126736);
}

TEST(GridMesh, RejectsBadInput) {
  EXPECT_THROW(GridMesh(0, 2, Rect{0, 0, 1, 1}), std::invalid_argument);
  EXPECT_THROW(GridMesh(2, 2, Rect{0, 0, -1, 1}), std::invalid_argument);
}

TEST(GridMesh, ElementNodesCounterClockwise) {
  GridMesh m(3, 2, Rect{0, 0, 3, 2});
  const auto n = m.element_nodes(m.element_id(1, 1));
  EXPECT_EQ(n[0], m.node_id(1, 1));
  EXPECT_EQ(n[1], m.node_id(2, 1));
  EXPECT_EQ(n[2], m.node_id(2, 2));
  EXPECT_EQ(n[3], m.node_id(1, 2));
}

TEST(ShapeEval, CenterAndCorner) {
  GridMesh m(2, 2, Rect{0, 0, 1, 1});
  const BasisEval c = shape_eval(m, 0, 0.0, 0.0, false);
  for (int a = 0; a < 4; ++a) EXPECT_DOUBLE_EQ(c.n[a], 0.25);
  const BasisEval k = shape_eval(m, 0, -1.0, -1.0, false);
  EXPECT_DOUBLE_EQ(k.n[0], 1.0);
  EXPECT_DOUBLE_EQ(k.n[1], 0.0);
  EXPECT_DOUBLE_EQ(k.n[2], 0.0);
  EXPECT_DOUBLE_EQ(k.n[3], 0.0);
}

TEST(ShapeEval, Bubble) {
  GridMesh m(2, 2, Rect{0, 0, 1, 1});
  EXPECT_DOUBLE_EQ(shape_eval(m, 0, 0.0, 0.0, true).n[4], 1.0);
  for (double s : {-1.0, 1.0}) {
    EXPECT_DOUBLE_EQ(shape_eval(m, 0, s, 0.3, true).n[4], 0.0);
    EXPECT_DOUBLE_EQ(shape_eval(m, 0, 0.7, s, true).n[4], 0.0);
  }
  EXPECT_EQ(shape_eval(m, 0, 0.0, 0.0, true).count(), 5);
  EXPECT_EQ(shape_eval(m, 0, 0.0, 0.0, false).count(), 4);
}

TEST(ShapeEval, GradientsOfLinearField) {
  GridMesh m(4, 3, Rect{-1, 2, 3, 5});
  for (int e = 0; e < m.element_count(); ++e) {
    const BasisEval b = shape_eval(m, e, 0.3, -0.6, false);
    double gx = 0.0;
    double gy = 0.0;
    const auto nodes = m.element_nodes(e);
    for (int a = 0; a < 4; ++a) {
      const Vec2 x = m.node(nodes[a]);
      const double f = 2.0 * x.x() - 3.0 * x.y();
      gx += b.dn_dx[a] * f;
      gy += b.dn_dy[a] * f;
    }
    EXPECT_NEAR(gx, 2.0, 1e-12);
    EXPECT_NEAR(gy, -3.0, 1e-12);
  }
}

TEST(ShapeEval, BadElementThrows) {
  GridMesh m(2, 2, Rect{0, 0, 1, 1});
  EXPECT_THROW(shape_eval(m, 4, 0, 0, false), std::invalid_argument);
  EXPECT_THROW(shape_eval(m, -1, 0, 0, false), std::invalid_argument);
}

TEST(Locate, Examples) {
  GridMesh m(2, 2, Rect{0, 0, 1, 1});
  const auto a = m.locate(Vec2(0.25, 0.25));
  ASSERT_TRUE(a.has_value());
  EXPECT_EQ(a->element, 0);
  EXPECT_NEAR(a->ref.x(), 0.0, 1e-14);
  EXPECT_NEAR(a->ref.y(), 0.0, 1e-14);
  const auto b = m.locate(Vec2(0, 0));
  ASSERT_TRUE(b.has_value());
  EXPECT_EQ(b->element, 0);
  EXPECT_DOUBLE_EQ(b->ref.x(), -1.0);
  EXPECT_DOUBLE_EQ(b->ref.y(), -1.0);
  EXPECT_FALSE(m.locate(Vec2(2, 2)).has_value());
}

TEST(Locate, InvertsReferenceMap) {
  GridMesh m(5, 4, Rect{-2, 1, 3, 3});
  const QuadratureRule rule = QuadratureRule::gauss(3);
  for (int e = 0; e < m.element_count(); ++e) {
    for (const QuadPoint& q : rule.points) {
      const Vec2 x = m.to_physical(e, Vec2(q.xi, q.eta));
      const auto loc = m.locate(x);
      ASSERT_TRUE(loc.has_value());
      EXPECT_EQ(loc->element, e);
      EXPECT_NEAR(loc->ref.x(), q.xi, 1e-10);
      EXPECT_NEAR(loc->ref.y(), q.eta, 1e-10);
    }
  }
}

TEST(Quadrature, InterpolatesCoordinates) {
  GridMesh m(3, 3, Rect{0, 0, 1.5, 0.9});
  for (int npts : {1, 2, 3}) {
    const QuadratureRule rule = QuadratureRule::gauss(npts);
    for (int e = 0; e < m.element_count(); ++e) {
      const auto nodes = m.element_nodes(e);
      for (const QuadPoint& q : rule.points) {
        const BasisEval b = shape_eval(m, e, q.xi, q.eta, false);
        Vec2 x = Vec2::Zero();
        for (int a = 0; a < 4; ++a) x += b.n[a] * m.node(nodes[a]);
        EXPECT_LT((x - m.to_physical(e, Vec2(q.xi, q.eta))).norm(), 1e-12 * m.h_ele());
      }
    }
  }
}

TEST(Quadrature, IntegratesAreaAndPolynomials) {
  GridMesh m(2, 2, Rect{0, 0, 1.2, 0.8});
  for (int npts : {1, 2, 3}) {
    const QuadratureRule rule = QuadratureRule::gauss(npts);
    double area = 0.0;
    for (const QuadPoint& q : rule.points) area += q.weight * shape_eval(m, 0, q.xi, q.eta, false).detJ;
    EXPECT_NEAR(area, m.hx() * m.hy(), 1e-12 * m.hx() * m.hy());
  }
  // Bubble squared is quartic; the 3x3 rule integrates it exactly: (16/15)^2 on the reference square.
  const QuadratureRule r3 = QuadratureRule::gauss(3);
  double s = 0.0;
  for (const QuadPoint& q : r3.points) {
    const double b = shape_eval(m, 0, q.xi, q.eta, true).n[4];
    s += q.weight * b * b;
  }
  EXPECT_NEAR(s, 256.0 / 225.0, 1e-13);
  EXPECT_THROW(QuadratureRule::gauss(4), std::invalid_argument);
}

TEST(Edges, CountAndBoundary) {
  GridMesh m(3, 2, Rect{0, 0, 3, 2});
  EXPECT_EQ(m.edges().size(), static_cast<std::size_t>(3 * 3 + 4 * 2));
  EXPECT_TRUE(m.is_boundary_node(m.node_id(0, 1)));
  EXPECT_FALSE(m.is_boundary_node(m.node_id(1, 1)));
}
